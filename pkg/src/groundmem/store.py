"""Single facade over the graph, the embedding index, and persistence.

Mutations are serialized behind one lock (single-writer, multi-reader).
Ingestion runs the four-step pipeline per caption: parse for entity
mentions, embed the plain text in chunks, append the image node to the
temporal chain, link the entities. Each caption is atomic: a failure at
any step skips that caption, reports it, and leaves prior captions intact.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import Callable, Sequence

import numpy as np

from . import captions
from .embeddings import DEFAULT_CHUNK_CHARS, EmbeddingIndex, SearchHit, chunk_text, stub_embed
from .expansion import ExpansionParams
from .graph import MemoryGraph
from .models import EntityType, GroundMemError, utc_now_seconds
from .perception import load_caption_fixture
from .snapshot import load_snapshot, save_snapshot
from .vault import export_vault, import_vault

DEFAULT_SAMPLE_RATE_HZ = 3.0

EmbedFn = Callable[[str], np.ndarray]


@dataclass(frozen=True)
class IngestItem:
    caption: str
    data_files: tuple[str, ...] = ()
    created_at: datetime | None = None


@dataclass(frozen=True)
class IngestFailure:
    position: int
    message: str

    def as_dict(self) -> dict[str, object]:
        return {"position": self.position, "message": self.message}


@dataclass
class IngestReport:
    notes_created: int = 0
    entities_created: int = 0
    failures: list[IngestFailure] = field(default_factory=list)

    def as_dict(self) -> dict[str, object]:
        return {
            "notes_created": self.notes_created,
            "entities_created": self.entities_created,
            "errors": [failure.as_dict() for failure in self.failures],
        }


def items_from_fixture(path: str, frame_prefix: str = "frames") -> list[IngestItem]:
    """Turn a caption fixture into ingest items, one per anchor frame."""
    items: list[IngestItem] = []
    for entry in load_caption_fixture(path):
        items.append(
            IngestItem(
                caption=entry.caption,
                data_files=(f"{frame_prefix}/frame_{entry.anchor_index:06d}.jpg",),
            )
        )
    return items


class MemoryStore:
    def __init__(
        self,
        embed: EmbedFn | None = None,
        chunk_chars: int = DEFAULT_CHUNK_CHARS,
        expansion_params: ExpansionParams | None = None,
    ) -> None:
        self.graph = MemoryGraph()
        self.index = EmbeddingIndex()
        self.embed: EmbedFn = embed if embed is not None else stub_embed
        self.chunk_chars = chunk_chars
        self.expansion_params = expansion_params or ExpansionParams()
        self.lock = threading.RLock()

    # ------------------------------------------------------------------
    # Ingestion
    # ------------------------------------------------------------------

    def ingest(
        self,
        items: Sequence[IngestItem],
        stream_start: datetime | None = None,
        sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ,
        new_stream: bool = True,
    ) -> IngestReport:
        """Run the four-step pipeline over ``items``; skip-and-report per caption.

        ``new_stream`` starts a fresh temporal chain; with it off, the batch
        extends the newest existing chain, including one restored from a
        snapshot. Captions without an explicit timestamp get
        ``stream_start + floor(sequence_index / sample_rate_hz)`` seconds,
        whole-second resolution.
        """
        report = IngestReport()
        with self.lock:
            if new_stream:
                self.graph.begin_stream()
            else:
                # Continue the newest chain even right after a snapshot
                # load, where the graph sits on a fresh empty stream.
                self.graph.resume_stream()
            if stream_start is None:
                stream_start = utc_now_seconds()
            entities_before = sum(1 for _ in self.graph.entities())
            for position, item in enumerate(items):
                failure = self._ingest_one(position, item, stream_start, sample_rate_hz)
                if failure is None:
                    report.notes_created += 1
                else:
                    report.failures.append(failure)
            report.entities_created = sum(1 for _ in self.graph.entities()) - entities_before
        return report

    def _ingest_one(
        self,
        position: int,
        item: IngestItem,
        stream_start: datetime,
        sample_rate_hz: float,
    ) -> IngestFailure | None:
        # Step 1: entity extraction. Grammar or type conflicts abort the
        # caption before anything is inserted.
        try:
            parsed = captions.parse_caption(item.caption)
        except captions.CaptionError as exc:
            return IngestFailure(position, f"caption does not parse: {exc}")
        mention_types: dict[str, EntityType] = {}
        for mention in parsed.mentions:
            previous = mention_types.get(mention.label)
            if previous is not None and previous is not mention.entity_type:
                return IngestFailure(
                    position,
                    f"label {mention.label!r} used as both {previous.value} "
                    f"and {mention.entity_type.value}",
                )
            mention_types[mention.label] = mention.entity_type
        for label, entity_type in mention_types.items():
            if self.graph.has_entity(label):
                existing = self.graph.get_entity(label).entity_type
                if existing is not entity_type:
                    return IngestFailure(
                        position,
                        f"label {label!r} is already {existing.value}, not {entity_type.value}",
                    )

        # Step 2: embedding with chunking, before any graph mutation.
        chunks = chunk_text(parsed.plain, self.chunk_chars) if parsed.plain else []
        try:
            vectors = [self.embed(chunk) for chunk in chunks]
        except GroundMemError as exc:
            return IngestFailure(position, f"embedding failed: {exc}")

        # Step 3: sequential image-node creation.
        created_at = item.created_at
        if created_at is None:
            offset = int(self.graph.next_sequence_index / sample_rate_hz)
            created_at = stream_start + timedelta(seconds=offset)
        note_id = self.graph.add_image_note(
            item.caption, data_files=list(item.data_files), created_at=created_at
        )

        # Step 4: entity linking, then the precomputed index entries.
        for mention in parsed.mentions:
            self.graph.upsert_entity_mention(note_id, mention.label, mention.entity_type)
        for ordinal, (chunk, vector) in enumerate(zip(chunks, vectors)):
            self.index.add_entry(note_id, ordinal, chunk, vector)
        if chunks:
            self.graph.get_note(note_id).has_embedding = True
        return None

    # ------------------------------------------------------------------
    # Retrieval primitives
    # ------------------------------------------------------------------

    def semantic_search(self, text: str, k: int) -> list[SearchHit]:
        if len(self.index) == 0:
            return []
        return self.index.search(self.embed(text), k)

    # ------------------------------------------------------------------
    # Persistence
    # ------------------------------------------------------------------

    def save(self, path: str) -> None:
        with self.lock:
            save_snapshot(self.graph, path, self.index)

    @classmethod
    def load(
        cls,
        path: str,
        embed: EmbedFn | None = None,
        chunk_chars: int = DEFAULT_CHUNK_CHARS,
        expansion_params: ExpansionParams | None = None,
    ) -> "MemoryStore":
        loaded = load_snapshot(path)
        store = cls(embed=embed, chunk_chars=chunk_chars, expansion_params=expansion_params)
        store.graph = loaded.graph
        store.index = loaded.index
        for note_id in loaded.index.note_ids():
            loaded.graph.get_note(note_id).has_embedding = True
        return store

    def export_vault(self, directory: str) -> int:
        with self.lock:
            return export_vault(self.graph, directory)

    @classmethod
    def load_vault(
        cls,
        directory: str,
        embed: EmbedFn | None = None,
        chunk_chars: int = DEFAULT_CHUNK_CHARS,
    ) -> "MemoryStore":
        """Import a vault and re-embed every note with the configured embedder."""
        store = cls(embed=embed, chunk_chars=chunk_chars)
        store.graph = import_vault(directory)
        for note in store.graph.notes():
            if note.plain_caption:
                store.index.index_note(note.id, note.plain_caption, store.embed, chunk_chars)
                note.has_embedding = True
        return store

    def content_hash(self) -> str:
        return f"{self.graph.content_hash()}:{self.index.content_hash()}"
