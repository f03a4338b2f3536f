"""Markdown vault export and import.

One file per image note, named ``<note_id>.md``: YAML front matter between
``---`` lines (id, type, created_at, data_files, entities), body = the plain
caption text. The vault is made for human browsing; it carries no raw
annotations, edges, or vectors. Import therefore reconstructs annotations by
re-marking every word-boundary occurrence of a listed entity label, and
rebuilds one temporal chain in note-id order. For single-stream graphs whose
captions annotate every label occurrence (all shipped fixtures do), the
round-trip reproduces the original graph exactly.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass

import yaml

from .graph import MemoryGraph
from .models import EntityType, GroundMemError, format_rfc3339, parse_rfc3339

FRONT_MATTER_DELIMITER = "---"


class VaultError(GroundMemError):
    pass


class IoFailure(VaultError):
    pass


class MalformedVaultNote(VaultError):
    def __init__(self, path: str, cause: str) -> None:
        super().__init__(f"{path}: {cause}")
        self.path = path


@dataclass(frozen=True)
class VaultNote:
    note_id: str
    created_at_text: str
    data_files: tuple[str, ...]
    entities: tuple[tuple[str, EntityType], ...]
    plain_caption: str


def _render_front_matter(note_id: str, created_at: str, data_files: list[str], entities: list[str]) -> str:
    lines = [
        FRONT_MATTER_DELIMITER,
        f"id: {note_id}",
        "type: image",
        f'created_at: "{created_at}"',
    ]
    if data_files:
        lines.append("data_files:")
        lines.extend(f"  - {json.dumps(path, ensure_ascii=False)}" for path in data_files)
    else:
        lines.append("data_files: []")
    if entities:
        lines.append("entities:")
        lines.extend(f"  - {entry}" for entry in entities)
    else:
        lines.append("entities: []")
    lines.append(FRONT_MATTER_DELIMITER)
    return "\n".join(lines)


def export_vault(graph: MemoryGraph, directory: str) -> int:
    """Write one markdown file per image note; returns the file count."""
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create vault directory {directory}: {exc}") from exc
    count = 0
    for note in graph.notes():
        entities = [
            f"{label}:{graph.get_entity(label).entity_type.value}"
            for label in graph.note_entity_labels(note.id)
        ]
        front = _render_front_matter(
            note.id, format_rfc3339(note.created_at), list(note.data_files), entities
        )
        body = f"{note.plain_caption}\n" if note.plain_caption else ""
        path = os.path.join(directory, f"{note.id}.md")
        try:
            with open(path, "w", encoding="utf-8") as handle:
                handle.write(f"{front}\n{body}")
        except OSError as exc:
            raise IoFailure(f"cannot write vault note {path}: {exc}") from exc
        count += 1
    return count


def parse_note_file(path: str, text: str) -> VaultNote:
    lines = text.split("\n")
    if not lines or lines[0] != FRONT_MATTER_DELIMITER:
        raise MalformedVaultNote(path, "missing opening front-matter delimiter")
    try:
        closing = lines.index(FRONT_MATTER_DELIMITER, 1)
    except ValueError:
        raise MalformedVaultNote(path, "missing closing front-matter delimiter") from None
    front_text = "\n".join(lines[1:closing])
    body = "\n".join(lines[closing + 1 :])
    if body.endswith("\n"):
        body = body[:-1]
    try:
        front = yaml.safe_load(front_text)
    except yaml.YAMLError as exc:
        raise MalformedVaultNote(path, f"bad front matter: {exc}") from exc
    if not isinstance(front, dict):
        raise MalformedVaultNote(path, "front matter is not a mapping")
    for key in ("id", "type", "created_at", "data_files", "entities"):
        if key not in front:
            raise MalformedVaultNote(path, f"front matter missing {key!r}")
    if front["type"] != "image":
        raise MalformedVaultNote(path, f"unsupported note type {front['type']!r}")
    entities: list[tuple[str, EntityType]] = []
    for entry in front["entities"] or []:
        if not isinstance(entry, str) or ":" not in entry:
            raise MalformedVaultNote(path, f"bad entity entry {entry!r}")
        label, _, type_name = entry.partition(":")
        try:
            entities.append((label, EntityType(type_name)))
        except ValueError:
            raise MalformedVaultNote(path, f"unknown entity type in {entry!r}") from None
    data_files = front["data_files"] or []
    if not isinstance(data_files, list) or not all(isinstance(p, str) for p in data_files):
        raise MalformedVaultNote(path, "data_files must be a list of strings")
    return VaultNote(
        note_id=str(front["id"]),
        created_at_text=str(front["created_at"]),
        data_files=tuple(data_files),
        entities=tuple(entities),
        plain_caption=body,
    )


def _annotate(plain: str, entities: tuple[tuple[str, EntityType], ...]) -> str:
    """Re-mark every word-boundary occurrence of each listed label."""
    if not entities:
        return plain
    types = dict(entities)
    pattern = re.compile(
        r"\b(" + "|".join(re.escape(label) for label, _ in entities) + r")\b"
    )
    return pattern.sub(lambda m: f"[{m.group(1)}:{types[m.group(1)].value}]", plain)


def import_vault(directory: str) -> MemoryGraph:
    """Rebuild a graph from a vault directory (one chain, note-id order)."""
    try:
        filenames = sorted(
            name for name in os.listdir(directory) if name.endswith(".md")
        )
    except OSError as exc:
        raise IoFailure(f"cannot read vault directory {directory}: {exc}") from exc
    graph = MemoryGraph()
    for name in filenames:
        path = os.path.join(directory, name)
        try:
            with open(path, encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise IoFailure(f"cannot read vault note {path}: {exc}") from exc
        note = parse_note_file(path, text)
        expected_id = name[: -len(".md")]
        if note.note_id != expected_id:
            raise MalformedVaultNote(path, f"front-matter id {note.note_id!r} does not match filename")
        try:
            created_at = parse_rfc3339(note.created_at_text)
        except ValueError as exc:
            raise MalformedVaultNote(path, f"bad created_at: {exc}") from exc
        note_id = graph.add_image_note(
            _annotate(note.plain_caption, note.entities),
            data_files=list(note.data_files),
            created_at=created_at,
        )
        for label, entity_type in note.entities:
            graph.upsert_entity_mention(note_id, label, entity_type)
    return graph
