"""Chunking, the deterministic stub embedder, and exact top-k search."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groundmem.embeddings import (
    STUB_DIM,
    DimensionMismatch,
    EmbeddingIndex,
    chunk_text,
    stub_embed,
    tokenize,
)

from . import oracles

# -- chunking -------------------------------------------------------------------


def test_short_text_is_one_chunk():
    assert chunk_text("hello world", 32) == ["hello world"]


def test_empty_text_has_no_chunks():
    assert chunk_text("") == []


def test_chunking_splits_at_whitespace():
    text = ("word " * 20).strip()  # 99 chars
    chunks = chunk_text(text, 40)
    assert all(len(c) <= 40 for c in chunks)
    assert all(not c.startswith(" ") and not c.endswith(" ") for c in chunks)
    assert " ".join(chunks) == text


def test_chunking_hard_cuts_unbroken_runs():
    text = "x" * 100
    chunks = chunk_text(text, 40)
    assert chunks == ["x" * 40, "x" * 40, "x" * 20]
    assert "".join(chunks) == text


def test_chunking_rejects_tiny_limit():
    with pytest.raises(ValueError):
        chunk_text("anything", 31)


@settings(max_examples=200)
@given(st.text(max_size=300), st.integers(min_value=32, max_value=80))
def test_chunking_invariants(text, max_chars):
    chunks = chunk_text(text, max_chars)
    assert all(chunks), "chunks are never empty"
    assert all(len(c) <= max_chars for c in chunks)
    # Chunks tile the original text in order; each split consumes at most
    # one character, and that character is whitespace.
    pos = 0
    for chunk in chunks:
        found = text.find(chunk, pos)
        assert found in (pos, pos + 1)
        if found == pos + 1:
            assert text[pos].isspace()
        pos = found + len(chunk)
    remainder = text[pos:]
    assert remainder == "" or (len(remainder) == 1 and remainder.isspace())
    if not text:
        assert chunks == []


# -- stub embedder ----------------------------------------------------------------


def test_stub_embed_is_deterministic():
    a = stub_embed("the red cup on the desk")
    b = stub_embed("the red cup on the desk")
    np.testing.assert_array_equal(a, b)
    assert a.shape == (STUB_DIM,)


def test_stub_embed_is_normalized():
    vec = stub_embed("some tokens here")
    assert abs(float(np.linalg.norm(vec)) - 1.0) < 1e-12


def test_stub_embed_empty_is_zero():
    np.testing.assert_array_equal(stub_embed("!!! ???"), np.zeros(STUB_DIM))


def test_stub_embed_separates_different_texts():
    a = stub_embed("person sitting at the desk")
    b = stub_embed("weather balloon over the ocean")
    assert float(a @ b) < 0.9


def test_identical_text_maximizes_cosine():
    text = "person_1 is reading in the armchair"
    assert abs(float(stub_embed(text) @ stub_embed(text)) - 1.0) < 1e-12


def test_tokenize_lowercases_alnum_runs():
    assert tokenize("The Cup_2 sat; 3 cats!") == ["the", "cup", "2", "sat", "3", "cats"]


# -- index ------------------------------------------------------------------------


def test_add_entry_validates():
    index = EmbeddingIndex()
    index.add_entry("img_0000", 0, "a", np.ones(4))
    with pytest.raises(ValueError, match="duplicate"):
        index.add_entry("img_0000", 0, "a", np.ones(4))
    with pytest.raises(DimensionMismatch):
        index.add_entry("img_0001", 0, "b", np.ones(5))
    with pytest.raises(DimensionMismatch):
        index.add_entry("img_0002", 0, "c", np.ones((2, 2)))
    with pytest.raises(ValueError, match="non-finite"):
        index.add_entry("img_0003", 0, "d", np.array([np.nan, 0.0, 0.0, 0.0]))


def test_search_validates_query():
    index = EmbeddingIndex()
    assert index.search(np.ones(3), 5) == []
    index.add_entry("img_0000", 0, "a", np.ones(4))
    with pytest.raises(DimensionMismatch):
        index.search(np.ones(3), 1)
    with pytest.raises(ValueError):
        index.search(np.ones(4), 0)


def test_search_takes_max_over_chunks():
    index = EmbeddingIndex()
    index.add_entry("img_0000", 0, "far", np.array([1.0, 0.0]))
    index.add_entry("img_0000", 1, "near", np.array([0.0, 1.0]))
    index.add_entry("img_0001", 0, "middling", np.array([0.5, 0.5]))
    hits = index.search(np.array([0.0, 1.0]), 2)
    assert hits[0].note_id == "img_0000"
    assert hits[0].chunk_ordinal == 1
    assert abs(hits[0].score - 1.0) < 1e-12


def test_search_breaks_ties_by_note_id():
    index = EmbeddingIndex()
    for note in ("img_0002", "img_0000", "img_0001"):
        index.add_entry(note, 0, "same", np.array([1.0, 0.0]))
    hits = index.search(np.array([1.0, 0.0]), 3)
    assert [h.note_id for h in hits] == ["img_0000", "img_0001", "img_0002"]


def test_zero_query_scores_zero():
    index = EmbeddingIndex()
    index.add_entry("img_0000", 0, "a", np.array([1.0, 0.0]))
    hits = index.search(np.zeros(2), 1)
    assert hits[0].score == 0.0


def test_index_note_chunks_and_counts():
    index = EmbeddingIndex()
    text = ("tok " * 30).strip()
    count = index.index_note("img_0000", text, stub_embed, max_chars=40)
    assert count == len(index.entries_for_note("img_0000")) == len(chunk_text(text, 40))


def test_topk_matches_exhaustive_oracle():
    """200 random entries across 100 notes; k in {1, 5, 10} (acceptance)."""
    rng = np.random.default_rng(42)
    index = EmbeddingIndex()
    entries = []
    for i in range(200):
        note_id = f"img_{i % 100:04d}"
        vector = rng.standard_normal(16)
        index.add_entry(note_id, i // 100, f"chunk {i}", vector)
        entries.append((note_id, vector.tolist()))
    query = rng.standard_normal(16)
    for k in (1, 5, 10):
        hits = index.search(query, k)
        expected = oracles.exhaustive_topk(entries, query.tolist(), k)
        assert [h.note_id for h in hits] == [nid for nid, _ in expected]
        for hit, (_, score) in zip(hits, expected):
            assert abs(hit.score - score) < 1e-9


def test_content_hash_tracks_entries():
    a, b = EmbeddingIndex(), EmbeddingIndex()
    assert a.content_hash() == b.content_hash()
    a.add_entry("img_0000", 0, "x", np.ones(3))
    assert a.content_hash() != b.content_hash()
    b.add_entry("img_0000", 0, "x", np.ones(3))
    assert a.content_hash() == b.content_hash()
