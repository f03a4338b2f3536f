"""Embedded property graph of memory notes and entity nodes.

Two edge kinds only: HAS_PREVIOUS chains image notes backwards in time
(new note -> previous note), HAS_ELEMENT links an image note to each
entity it mentions. Multiple ingestion streams form disjoint chains.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterator, Optional

from . import captions
from .models import (
    EdgeKind,
    EntityNode,
    EntityType,
    GroundMemError,
    ImageNote,
    NoteId,
    format_rfc3339,
    utc_now_seconds,
)


class GraphError(GroundMemError):
    pass


class MalformedCaption(GraphError):
    """Caption rejected by the grammar; nothing was inserted."""


class UnknownNote(GraphError):
    pass


class TypeConflict(GraphError):
    """A label was re-used with a different entity type."""


@dataclass
class GraphStats:
    image_count: int
    entity_counts_by_type: dict[str, int]
    edge_counts_by_kind: dict[str, int]
    chain_count: int

    def as_dict(self) -> dict:
        return {
            "image_count": self.image_count,
            "entity_counts_by_type": self.entity_counts_by_type,
            "edge_counts_by_kind": self.edge_counts_by_kind,
            "chain_count": self.chain_count,
        }


Edge = tuple[str, EdgeKind, str]


class MemoryGraph:
    """In-memory graph with duplicate-edge suppression at insertion time.

    Not thread-safe by itself; the store serializes mutations.
    """

    def __init__(self) -> None:
        self._notes: dict[NoteId, ImageNote] = {}
        self._entities: dict[str, EntityNode] = {}
        self._edges: list[Edge] = []
        self._edge_set: set[Edge] = set()
        self._prev: dict[NoteId, NoteId] = {}
        self._next: dict[NoteId, NoteId] = {}
        self._note_entities: dict[NoteId, list[str]] = {}
        self._entity_notes: dict[str, list[NoteId]] = {}
        self._stream_id = 0
        self._stream_tail: Optional[NoteId] = None

    # ------------------------------------------------------------------
    # Mutations
    # ------------------------------------------------------------------

    def begin_stream(self) -> int:
        """Start a new temporal chain; the next note gets no predecessor."""
        if self._stream_tail is not None:
            self._stream_id += 1
            self._stream_tail = None
        return self._stream_id

    def resume_stream(self) -> int:
        """Re-open the newest chain so the next note extends it.

        A loaded graph is positioned on a fresh stream; resuming moves it
        back onto the chain of the newest note. No-op when a chain is
        already open or the graph holds no notes.
        """
        if self._stream_tail is None and self._notes:
            newest = max(self._notes.values(), key=lambda n: n.sequence_index)
            self._stream_id = newest.stream_id
            self._stream_tail = newest.id
        return self._stream_id

    def add_image_note(
        self,
        caption: str,
        data_files: list[str] | None = None,
        created_at: datetime | None = None,
    ) -> NoteId:
        """Append an image note to the current stream.

        The caption must parse under the annotation grammar; a grammar
        failure raises MalformedCaption and inserts nothing. Entity
        mentions are not linked here (see upsert_entity_mention).
        """
        try:
            parsed = captions.parse_caption(caption)
        except captions.CaptionError as exc:
            raise MalformedCaption(str(exc)) from exc
        seq = len(self._notes)
        note = ImageNote(
            id=f"img_{seq:04d}",
            caption=caption,
            plain_caption=parsed.plain,
            data_files=list(data_files or []),
            created_at=created_at if created_at is not None else utc_now_seconds(),
            sequence_index=seq,
            stream_id=self._stream_id,
        )
        self._notes[note.id] = note
        self._note_entities[note.id] = []
        if self._stream_tail is not None:
            self._add_edge(note.id, EdgeKind.HAS_PREVIOUS, self._stream_tail)
            self._prev[note.id] = self._stream_tail
            self._next[self._stream_tail] = note.id
        self._stream_tail = note.id
        return note.id

    def upsert_entity_mention(self, image: NoteId, label: str, entity_type: EntityType) -> str:
        """Link an image note to an entity, creating the entity on first use.

        Idempotent: the (image, label) pair carries at most one
        HAS_ELEMENT edge regardless of how often it is applied.
        """
        if image not in self._notes:
            raise UnknownNote(image)
        if not captions.LABEL_RE.fullmatch(label):
            raise ValueError(f"invalid entity label {label!r}")
        entity = self._entities.get(label)
        if entity is None:
            entity = EntityNode(label=label, entity_type=entity_type, first_seen=image)
            self._entities[label] = entity
            self._entity_notes[label] = []
        elif entity.entity_type is not entity_type:
            raise TypeConflict(
                f"label {label!r} is {entity.entity_type.value}, not {entity_type.value}"
            )
        if self._add_edge(image, EdgeKind.HAS_ELEMENT, label):
            entity.mention_count += 1
            self._note_entities[image].append(label)
            self._entity_notes[label].append(image)
        return label

    def _add_edge(self, source: str, kind: EdgeKind, target: str) -> bool:
        if source == target:
            raise GraphError(f"self-loop rejected: {source}")
        edge = (source, kind, target)
        if edge in self._edge_set:
            return False
        self._edges.append(edge)
        self._edge_set.add(edge)
        return True

    @classmethod
    def from_parts(
        cls,
        notes: list[ImageNote],
        entities: list[EntityNode],
        edges: list[Edge],
    ) -> "MemoryGraph":
        """Rebuild a graph from saved parts, revalidating every invariant.

        The loaded graph is positioned to begin a fresh stream: new notes
        start a new chain instead of extending a restored one.
        """
        graph = cls()
        for note in notes:
            if note.id in graph._notes:
                raise GraphError(f"duplicate note id {note.id!r}")
            graph._notes[note.id] = note
            graph._note_entities[note.id] = []
        for entity in entities:
            if entity.label in graph._entities:
                raise GraphError(f"duplicate entity label {entity.label!r}")
            graph._entities[entity.label] = entity
            graph._entity_notes[entity.label] = []
        for source, kind, target in edges:
            if kind is EdgeKind.HAS_PREVIOUS:
                if source not in graph._notes or target not in graph._notes:
                    raise GraphError(f"HAS_PREVIOUS endpoints must be notes: {source}->{target}")
            elif source not in graph._notes or target not in graph._entities:
                raise GraphError(f"HAS_ELEMENT must link a note to an entity: {source}->{target}")
            if not graph._add_edge(source, kind, target):
                raise GraphError(f"duplicate edge {source}-{kind.value}->{target}")
            if kind is EdgeKind.HAS_PREVIOUS:
                if source in graph._prev or target in graph._next:
                    raise GraphError(f"HAS_PREVIOUS degree exceeds 1 near {source}")
                graph._prev[source] = target
                graph._next[target] = source
            else:
                graph._note_entities[source].append(target)
                graph._entity_notes[target].append(source)
        visited: set[NoteId] = set()
        for tail in (nid for nid in graph._notes if nid not in graph._next):
            current: Optional[NoteId] = tail
            while current is not None and current not in visited:
                visited.add(current)
                current = graph._prev.get(current)
        if len(visited) != len(graph._notes):
            raise GraphError("HAS_PREVIOUS edges contain a cycle")
        for entity in graph._entities.values():
            linked = len(graph._entity_notes[entity.label])
            if entity.mention_count != linked:
                raise GraphError(
                    f"mention_count for {entity.label!r} is {entity.mention_count}, "
                    f"but {linked} HAS_ELEMENT edge(s) target it"
                )
        graph._stream_id = 1 + max((n.stream_id for n in graph._notes.values()), default=-1)
        graph._stream_tail = None
        return graph

    # ------------------------------------------------------------------
    # Reads
    # ------------------------------------------------------------------

    def __len__(self) -> int:
        return len(self._notes) + len(self._entities)

    @property
    def note_count(self) -> int:
        return len(self._notes)

    @property
    def next_sequence_index(self) -> int:
        return len(self._notes)

    def has_note(self, note_id: NoteId) -> bool:
        return note_id in self._notes

    def get_note(self, note_id: NoteId) -> ImageNote:
        try:
            return self._notes[note_id]
        except KeyError:
            raise UnknownNote(note_id) from None

    def notes(self) -> Iterator[ImageNote]:
        """Notes in insertion (sequence_index) order."""
        return iter(self._notes.values())

    def note_ids(self) -> list[NoteId]:
        return list(self._notes.keys())

    def get_entity(self, label: str) -> EntityNode:
        try:
            return self._entities[label]
        except KeyError:
            raise UnknownNote(label) from None

    def has_entity(self, label: str) -> bool:
        return label in self._entities

    def entities(self) -> Iterator[EntityNode]:
        return iter(self._entities.values())

    def edges(self) -> list[Edge]:
        return list(self._edges)

    def previous_note(self, note_id: NoteId) -> Optional[NoteId]:
        self.get_note(note_id)
        return self._prev.get(note_id)

    def next_note(self, note_id: NoteId) -> Optional[NoteId]:
        self.get_note(note_id)
        return self._next.get(note_id)

    def note_entity_labels(self, note_id: NoteId) -> list[str]:
        self.get_note(note_id)
        return list(self._note_entities[note_id])

    def entity_note_ids(self, label: str) -> list[NoteId]:
        self.get_entity(label)
        return list(self._entity_notes[label])

    def stats(self) -> GraphStats:
        """Counts computed by full enumeration."""
        entity_counts = {member.value: 0 for member in EntityType}
        for entity in self._entities.values():
            entity_counts[entity.entity_type.value] += 1
        edge_counts = {member.value: 0 for member in EdgeKind}
        for _, kind, _ in self._edges:
            edge_counts[kind.value] += 1
        has_previous_sources = {
            src for src, kind, _ in self._edges if kind is EdgeKind.HAS_PREVIOUS
        }
        chain_count = sum(1 for note_id in self._notes if note_id not in has_previous_sources)
        return GraphStats(
            image_count=len(self._notes),
            entity_counts_by_type=entity_counts,
            edge_counts_by_kind=edge_counts,
            chain_count=chain_count,
        )

    def content_hash(self) -> str:
        """Stable digest of all nodes, edges, and attributes."""
        payload = {
            "notes": [
                [
                    n.id,
                    n.caption,
                    n.plain_caption,
                    n.data_files,
                    format_rfc3339(n.created_at),
                    n.sequence_index,
                    n.stream_id,
                ]
                for n in self._notes.values()
            ],
            "entities": sorted(
                [e.label, e.entity_type.value, e.first_seen, e.mention_count]
                for e in self._entities.values()
            ),
            "edges": sorted([s, k.value, t] for s, k, t in self._edges),
        }
        blob = json.dumps(payload, ensure_ascii=False, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()
