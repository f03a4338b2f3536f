"""Deterministic caption fixtures for tests, demos, and the CLI.

The home-scene fixture is a 329-caption stream over one person moving
through a small apartment: a single Agent (person_1), a fixed cast of
objects and actions, every label occurrence annotated, anchors at every
tenth frame. The generator is pure (seeded cycle, no randomness), so the
shipped JSONL file and a fresh generation are byte-identical.
"""

from __future__ import annotations

import json
from importlib import resources

from .perception import WindowCaption

HOME_SCENE_FILENAME = "home_329.jsonl"

FIXTURE_NOTE_COUNT = 329
FIXTURE_ANCHOR_STEP = 10

# One agent only; Table-style counting over this fixture must find a
# single distinct Agent.
_AGENT = "person_1"

# (caption template, ) cycled over the stream. Each template mentions the
# agent exactly once plus a small set of objects and actions.
_SCENES: tuple[str, ...] = (
    "[person_1:Agent] is [reading_1:Action] a [book_1:Object] on the [sofa_1:Object] in the living room",
    "[person_1:Agent] is [drinking_1:Action] from a [mug_1:Object] at the [table_1:Object]",
    "[person_1:Agent] is [typing_1:Action] on a [laptop_1:Object] at the [desk_1:Object]",
    "[person_1:Agent] is [watering_1:Action] the [plant_1:Object] by the [window_1:Object]",
    "[person_1:Agent] is [cooking_1:Action] at the [stove_1:Object] with a [pan_1:Object]",
    "[person_1:Agent] is [lying_1:Action] on the floor next to the [sofa_1:Object]",
    "[person_1:Agent] is [stretching_1:Action] on a [mat_1:Object] near the [window_1:Object]",
    "[person_1:Agent] is [writing_1:Action] in a [notebook_1:Object] at the [table_1:Object]",
    "[person_1:Agent] is [folding_1:Action] [laundry_1:Object] beside the [bed_1:Object]",
    "[person_1:Agent] is [sweeping_1:Action] the kitchen with a [broom_1:Object]",
    "[person_1:Agent] is [reading_1:Action] the [book_1:Object] again by the [lamp_1:Object]",
    "the [kitchen_1:Object] is empty and the [kettle_1:Object] sits on the counter",
)


def generate_home_scene(count: int = FIXTURE_NOTE_COUNT) -> list[WindowCaption]:
    """The deterministic home-scene caption stream, ``count`` notes long."""
    entries: list[WindowCaption] = []
    for i in range(count):
        caption = _SCENES[i % len(_SCENES)]
        entries.append(
            WindowCaption(anchor_index=(i + 1) * FIXTURE_ANCHOR_STEP, caption=caption)
        )
    return entries


def write_fixture(path: str, entries: list[WindowCaption]) -> int:
    """Write entries as the JSONL caption-fixture format; returns line count."""
    with open(path, "w", encoding="utf-8") as handle:
        for entry in entries:
            handle.write(
                json.dumps(
                    {"anchor_index": entry.anchor_index, "caption": entry.caption},
                    ensure_ascii=False,
                )
                + "\n"
            )
    return len(entries)


def home_scene_path() -> str:
    """Filesystem path of the shipped 329-caption home-scene fixture."""
    return str(resources.files("groundmem.data").joinpath(HOME_SCENE_FILENAME))
