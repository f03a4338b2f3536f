"""Shared domain types for the grounded memory engine."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime, timezone


class GroundMemError(Exception):
    """Base class for all errors raised by this package."""


class EntityType(enum.Enum):
    """Closed set of entity categories linked to memory notes."""

    AGENT = "Agent"
    OBJECT = "Object"
    ACTION = "Action"

    @classmethod
    def from_token(cls, token: str) -> "EntityType":
        for member in cls:
            if member.value == token:
                return member
        raise KeyError(token)


class EdgeKind(enum.Enum):
    """Edge vocabulary: temporal chaining and entity linking."""

    HAS_PREVIOUS = "HAS_PREVIOUS"
    HAS_ELEMENT = "HAS_ELEMENT"


# NoteId is an opaque string: "img_<zero-padded counter>" for image notes,
# the entity label itself for entity nodes.
NoteId = str


def utc_now_seconds() -> datetime:
    """Current UTC time truncated to whole seconds."""
    return datetime.now(timezone.utc).replace(microsecond=0)


def format_rfc3339(ts: datetime) -> str:
    """Render a UTC timestamp as RFC 3339 with a Z suffix."""
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_rfc3339(text: str) -> datetime:
    """Parse an RFC 3339 timestamp (Z or numeric offset) to aware UTC."""
    cleaned = text.strip()
    if cleaned.endswith("Z"):
        cleaned = cleaned[:-1] + "+00:00"
    ts = datetime.fromisoformat(cleaned)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).replace(microsecond=0)


@dataclass
class ImageNote:
    """A memory note over a time period, backed by an image caption.

    ``caption`` keeps the annotated source text, ``plain_caption`` the
    annotation-stripped rendering used for embeddings and display.
    """

    id: NoteId
    caption: str
    plain_caption: str
    data_files: list[str] = field(default_factory=list)
    created_at: datetime = field(default_factory=utc_now_seconds)
    sequence_index: int = 0
    # Chain (stream) this note belongs to; consecutive notes of one stream
    # are linked by HAS_PREVIOUS edges.
    stream_id: int = 0
    # True once embedding chunks for this note exist in the index.
    has_embedding: bool = False


@dataclass
class EntityNode:
    """A disambiguated Agent, Object, or Action instance."""

    label: str
    entity_type: EntityType
    first_seen: NoteId
    mention_count: int = 0
