"""The shipped home-scene fixture: shape, grammar conformance, and the
guarantee that the checked-in file matches a fresh generation byte for byte."""

from groundmem.captions import parse_caption
from groundmem.fixtures import (
    FIXTURE_ANCHOR_STEP,
    FIXTURE_NOTE_COUNT,
    generate_home_scene,
    home_scene_path,
    write_fixture,
)
from groundmem.models import EntityType
from groundmem.perception import load_caption_fixture


def test_fixture_has_329_entries():
    entries = load_caption_fixture(home_scene_path())
    assert len(entries) == FIXTURE_NOTE_COUNT == 329


def test_shipped_file_matches_generation_byte_for_byte(tmp_path):
    regenerated = tmp_path / "regen.jsonl"
    count = write_fixture(str(regenerated), generate_home_scene())
    assert count == 329
    shipped_bytes = open(home_scene_path(), "rb").read()
    assert regenerated.read_bytes() == shipped_bytes


def test_anchors_step_by_ten():
    entries = load_caption_fixture(home_scene_path())
    assert [e.anchor_index for e in entries[:4]] == [10, 20, 30, 40]
    assert all(
        e.anchor_index == (i + 1) * FIXTURE_ANCHOR_STEP for i, e in enumerate(entries)
    )


def test_every_caption_parses_with_exactly_one_agent_overall():
    entries = load_caption_fixture(home_scene_path())
    agents = set()
    labels = {}
    for entry in entries:
        parsed = parse_caption(entry.caption)
        assert not parsed.has_stray_brackets
        for mention in parsed.mentions:
            previous = labels.setdefault(mention.label, mention.entity_type)
            assert previous is mention.entity_type, "type conflict inside the fixture"
            if mention.entity_type is EntityType.AGENT:
                agents.add(mention.label)
    assert agents == {"person_1"}


def test_generation_is_pure():
    assert generate_home_scene() == generate_home_scene()
    short = generate_home_scene(count=5)
    assert len(short) == 5
    assert short == generate_home_scene()[:5]
