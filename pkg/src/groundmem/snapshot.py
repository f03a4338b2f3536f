"""Snapshot persistence: one JSON document for the graph and its embeddings.

Layout: ``{"version": 1, "checksum": "<sha256>", "nodes": [...], "edges": [...]}``.
Image-note records carry their embedding chunks inline as arrays of decimal
floats; entity records carry their attributes. The checksum covers the nodes
and edges payload, so truncation or editing is detected before any graph is
built. Writes go through a temp file and rename, so a crashed save never
leaves a half-written snapshot behind.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass

from .embeddings import EmbeddingIndex
from .graph import MemoryGraph
from .models import (
    EdgeKind,
    EntityNode,
    EntityType,
    GroundMemError,
    ImageNote,
    format_rfc3339,
    parse_rfc3339,
)

SNAPSHOT_VERSION = 1


class SnapshotError(GroundMemError):
    pass


class IoFailure(SnapshotError):
    pass


class CorruptSnapshot(SnapshotError):
    """Version or checksum mismatch, or a malformed document."""


@dataclass
class LoadedSnapshot:
    graph: MemoryGraph
    index: EmbeddingIndex


def _payload_checksum(nodes: list[dict], edges: list[list[str]]) -> str:
    blob = json.dumps(
        {"version": SNAPSHOT_VERSION, "nodes": nodes, "edges": edges},
        ensure_ascii=False,
        separators=(",", ":"),
        sort_keys=True,
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _note_record(note: ImageNote, index: EmbeddingIndex | None) -> dict:
    record: dict = {
        "id": note.id,
        "kind": "image",
        "caption": note.caption,
        "plain_caption": note.plain_caption,
        "data_files": list(note.data_files),
        "created_at": format_rfc3339(note.created_at),
        "sequence_index": note.sequence_index,
        "stream_id": note.stream_id,
        "embeddings": [],
    }
    if index is not None:
        record["embeddings"] = [
            {
                "chunk_ordinal": entry.chunk_ordinal,
                "text": entry.text,
                "vector": list(entry.vector),
            }
            for entry in index.entries_for_note(note.id)
        ]
    return record


def save_snapshot(graph: MemoryGraph, path: str, index: EmbeddingIndex | None = None) -> None:
    """Write the graph (and its embedding entries, if given) to ``path``.

    Atomic: the document lands under a temp name in the same directory and
    is renamed into place only after a successful full write.
    """
    nodes: list[dict] = [_note_record(note, index) for note in graph.notes()]
    for entity in graph.entities():
        nodes.append(
            {
                "id": entity.label,
                "kind": "entity",
                "label": entity.label,
                "entity_type": entity.entity_type.value,
                "first_seen": entity.first_seen,
                "mention_count": entity.mention_count,
            }
        )
    edges = [[source, kind.value, target] for source, kind, target in graph.edges()]
    document = {
        "version": SNAPSHOT_VERSION,
        "checksum": _payload_checksum(nodes, edges),
        "nodes": nodes,
        "edges": edges,
    }
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        fd, temp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                json.dump(document, handle, ensure_ascii=False, indent=1)
            os.replace(temp_path, path)
        except BaseException:
            if os.path.exists(temp_path):
                os.unlink(temp_path)
            raise
    except OSError as exc:
        raise IoFailure(f"cannot write snapshot {path}: {exc}") from exc


def load_snapshot(path: str) -> LoadedSnapshot:
    """Read a snapshot, verify version and checksum, rebuild graph and index."""
    try:
        with open(path, encoding="utf-8") as handle:
            document = json.load(handle)
    except OSError as exc:
        raise IoFailure(f"cannot read snapshot {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CorruptSnapshot(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise CorruptSnapshot(f"{path}: snapshot must be a JSON object")
    version = document.get("version")
    if version != SNAPSHOT_VERSION:
        raise CorruptSnapshot(f"{path}: unsupported snapshot version {version!r}")
    nodes = document.get("nodes")
    edges = document.get("edges")
    checksum = document.get("checksum")
    if not isinstance(nodes, list) or not isinstance(edges, list) or not isinstance(checksum, str):
        raise CorruptSnapshot(f"{path}: missing nodes, edges, or checksum")
    if _payload_checksum(nodes, edges) != checksum:
        raise CorruptSnapshot(f"{path}: checksum mismatch")

    notes: list[ImageNote] = []
    entities: list[EntityNode] = []
    embeddings: list[tuple[str, int, str, list[float]]] = []
    try:
        for record in nodes:
            if record["kind"] == "image":
                notes.append(
                    ImageNote(
                        id=record["id"],
                        caption=record["caption"],
                        plain_caption=record["plain_caption"],
                        data_files=list(record["data_files"]),
                        created_at=parse_rfc3339(record["created_at"]),
                        sequence_index=int(record["sequence_index"]),
                        stream_id=int(record["stream_id"]),
                    )
                )
                for chunk in record.get("embeddings", []):
                    embeddings.append(
                        (
                            record["id"],
                            int(chunk["chunk_ordinal"]),
                            chunk["text"],
                            [float(x) for x in chunk["vector"]],
                        )
                    )
            elif record["kind"] == "entity":
                entities.append(
                    EntityNode(
                        label=record["label"],
                        entity_type=EntityType(record["entity_type"]),
                        first_seen=record["first_seen"],
                        mention_count=int(record["mention_count"]),
                    )
                )
            else:
                raise CorruptSnapshot(f"{path}: unknown node kind {record['kind']!r}")
        edge_tuples = [(src, EdgeKind(kind), dst) for src, kind, dst in edges]
    except CorruptSnapshot:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptSnapshot(f"{path}: malformed record: {exc}") from exc

    try:
        graph = MemoryGraph.from_parts(notes, entities, edge_tuples)
    except GroundMemError as exc:
        raise CorruptSnapshot(f"{path}: invariant violation: {exc}") from exc

    index = EmbeddingIndex()
    for note_id, ordinal, text, vector in embeddings:
        index.add_entry(note_id, ordinal, text, vector)
    return LoadedSnapshot(graph=graph, index=index)
