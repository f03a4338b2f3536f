"""Parser for captions carrying inline entity annotations.

Grammar (EBNF, normative; also in docs/caption_grammar.md):

    caption  := ( plain_char | mention )*
    mention  := '[' label ':' type ']'
    label    := /[a-z][a-z0-9]*(_[a-z0-9]+)*_[0-9]+/
    type     := 'Agent' | 'Object' | 'Action'          (case-sensitive)

Anything outside a mention passes through verbatim. A stray '[' that does
not open an annotation (no ':' before the closing ']', or no ']' and no
':' at all) is tolerated as literal text but marks the caption as not
strictly clean; a '['..':' run that never completes a valid mention is an
error. Nested annotations are forbidden.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple

from .models import EntityType, GroundMemError

LABEL_RE = re.compile(r"[a-z][a-z0-9]*(?:_[a-z0-9]+)*_[0-9]+\Z")

_TYPE_TOKENS = {member.value: member for member in EntityType}


class CaptionError(GroundMemError):
    """Base class for caption grammar failures."""


class UnknownEntityType(CaptionError):
    """Annotation type token outside the closed Agent/Object/Action set."""

    def __init__(self, token: str, offset: int):
        self.token = token
        self.offset = offset
        super().__init__(f"unknown entity type {token!r} at offset {offset}")


class UnterminatedAnnotation(CaptionError):
    """A '['..':' sequence that never completes a valid annotation."""

    def __init__(self, offset: int, detail: str = "no closing ']'"):
        self.offset = offset
        super().__init__(f"malformed annotation at offset {offset}: {detail}")


class InconsistentSpans(CaptionError):
    """Mention spans that do not describe the raw caption."""


@dataclass(frozen=True)
class Mention:
    """One entity annotation; span is (start, end) offsets of the
    bracketed source text within the raw caption."""

    label: str
    entity_type: EntityType
    span: tuple[int, int]


@dataclass(frozen=True)
class ParsedCaption:
    raw: str
    plain: str
    mentions: tuple[Mention, ...]
    # True when stray (non-annotation) brackets were passed through.
    has_stray_brackets: bool = False

    def labels(self) -> list[str]:
        return [m.label for m in self.mentions]


class StripResult(NamedTuple):
    text: str
    clean: bool


def parse_caption(text: str) -> ParsedCaption:
    """Parse an annotated caption into plain text plus ordered mentions.

    Raises UnknownEntityType or UnterminatedAnnotation on malformed
    annotations; stray brackets that never look like an annotation pass
    through as literal text.
    """
    plain_parts: list[str] = []
    mentions: list[Mention] = []
    stray = False
    pos = 0
    n = len(text)
    while pos < n:
        start = text.find("[", pos)
        if start < 0:
            plain_parts.append(text[pos:])
            break
        plain_parts.append(text[pos:start])
        close = text.find("]", start + 1)
        if close < 0:
            if ":" in text[start + 1 :]:
                raise UnterminatedAnnotation(start)
            # Literal tail, e.g. "a [b".
            plain_parts.append(text[start:])
            stray = True
            break
        content = text[start + 1 : close]
        if ":" not in content:
            # Bracketed text without a colon is not an annotation, e.g. "[5pm]".
            plain_parts.append(text[start : close + 1])
            stray = True
            pos = close + 1
            continue
        label, type_token = content.split(":", 1)
        if type_token not in _TYPE_TOKENS:
            raise UnknownEntityType(type_token, start)
        if not LABEL_RE.fullmatch(label):
            raise UnterminatedAnnotation(start, f"invalid label {label!r}")
        mentions.append(
            Mention(label=label, entity_type=_TYPE_TOKENS[type_token], span=(start, close + 1))
        )
        plain_parts.append(label)
        pos = close + 1
    return ParsedCaption(
        raw=text,
        plain="".join(plain_parts),
        mentions=tuple(mentions),
        has_stray_brackets=stray,
    )


def strip_annotations(text: str) -> StripResult:
    """Total annotation stripper.

    Returns the plain text and a cleanliness flag. Text that fails the
    grammar comes back unchanged with ``clean=False``; text that parsed
    only via stray-bracket tolerance is also flagged.
    """
    try:
        parsed = parse_caption(text)
    except CaptionError:
        return StripResult(text, False)
    return StripResult(parsed.plain, not parsed.has_stray_brackets)


def render_annotated(parsed: ParsedCaption) -> str:
    """Rebuild the annotated caption from parsed parts.

    Inverse of parse_caption for every caption that parses without error:
    render_annotated(parse_caption(t)) == t.
    """
    raw = parsed.raw
    prev_end = 0
    parts: list[str] = []
    for mention in parsed.mentions:
        start, end = mention.span
        if start < prev_end or end > len(raw) or start >= end:
            raise InconsistentSpans(f"span {mention.span} out of order or out of bounds")
        parts.append(raw[prev_end:start])
        parts.append(f"[{mention.label}:{mention.entity_type.value}]")
        prev_end = end
    parts.append(raw[prev_end:])
    return "".join(parts)
