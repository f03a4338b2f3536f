"""Embedding storage and exact cosine top-k search over note texts.

Search is an exhaustive scan by design: corpora are desk-scale and
exactness keeps differential tests meaningful. The deterministic stub
embedder stands in for hosted embedding models in hermetic runs.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

import numpy as np

from . import kernels
from .models import GroundMemError, NoteId

STUB_DIM = 64
DEFAULT_CHUNK_CHARS = 2000

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class DimensionMismatch(GroundMemError):
    pass


@dataclass(frozen=True)
class IndexEntry:
    note_id: NoteId
    chunk_ordinal: int
    text: str
    vector: tuple[float, ...]


@dataclass(frozen=True)
class SearchHit:
    note_id: NoteId
    score: float
    chunk_ordinal: int


def chunk_text(text: str, max_chars: int = DEFAULT_CHUNK_CHARS) -> list[str]:
    """Greedy split into chunks of at most max_chars.

    Splits at the last whitespace that keeps the chunk within the limit,
    dropping that single whitespace; hard-cuts when a run has no
    whitespace. Empty input yields no chunks.
    """
    if max_chars < 32:
        raise ValueError("max_chars must be >= 32")
    if not text:
        return []
    chunks: list[str] = []
    pos = 0
    n = len(text)
    while pos < n:
        if n - pos <= max_chars:
            chunks.append(text[pos:])
            break
        window = text[pos : pos + max_chars + 1]
        cut = -1
        for idx in range(len(window) - 1, 0, -1):
            if idx <= max_chars and window[idx].isspace():
                cut = idx
                break
        if cut <= 0:
            chunks.append(text[pos : pos + max_chars])
            pos += max_chars
        else:
            chunks.append(text[pos : pos + cut])
            pos += cut + 1
    return chunks


def tokenize(text: str) -> list[str]:
    """Lowercase alphanumeric tokens; shared by the stub embedder and reranker."""
    return _TOKEN_RE.findall(text.lower())


def _token_hash(token: str, key: bytes) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8, key=key).digest()
    return int.from_bytes(digest, "little")


def stub_embed(text: str, dim: int = STUB_DIM) -> np.ndarray:
    """Deterministic hashed bag-of-tokens embedding.

    Each token lands in a bucket chosen by one keyed hash with a sign
    from a second; accumulated counts are L2-normalized. Empty token
    sets embed to the zero vector. Bit-stable across runs and platforms.
    """
    vec = np.zeros(dim, dtype=np.float64)
    for token in tokenize(text):
        bucket = _token_hash(token, b"bucket") % dim
        sign = 1.0 if _token_hash(token, b"sign") % 2 == 0 else -1.0
        vec[bucket] += sign
    norm = np.linalg.norm(vec)
    if norm > 0.0:
        vec /= norm
    return vec


class EmbeddingIndex:
    """Chunk-level vector index with per-note max-score search."""

    def __init__(self, dim: int | None = None):
        self._dim = dim
        self._entries: list[IndexEntry] = []
        self._keys: set[tuple[NoteId, int]] = set()
        self._matrix: np.ndarray | None = None

    @property
    def dim(self) -> int | None:
        return self._dim

    def __len__(self) -> int:
        return len(self._entries)

    def note_ids(self) -> list[NoteId]:
        seen: dict[NoteId, None] = {}
        for entry in self._entries:
            seen.setdefault(entry.note_id, None)
        return list(seen)

    def entries(self) -> list[IndexEntry]:
        return list(self._entries)

    def entries_for_note(self, note_id: NoteId) -> list[IndexEntry]:
        return [e for e in self._entries if e.note_id == note_id]

    def add_entry(self, note_id: NoteId, chunk_ordinal: int, text: str, vector) -> None:
        vec = np.asarray(vector, dtype=np.float64)
        if vec.ndim != 1:
            raise DimensionMismatch(f"expected a 1-d vector, got shape {vec.shape}")
        if not np.all(np.isfinite(vec)):
            raise ValueError("vector contains non-finite values")
        if self._dim is None:
            self._dim = int(vec.shape[0])
        elif vec.shape[0] != self._dim:
            raise DimensionMismatch(f"index dim {self._dim}, vector dim {vec.shape[0]}")
        key = (note_id, chunk_ordinal)
        if key in self._keys:
            raise ValueError(f"duplicate index entry {key}")
        self._keys.add(key)
        self._entries.append(
            IndexEntry(note_id=note_id, chunk_ordinal=chunk_ordinal, text=text, vector=tuple(vec))
        )
        self._matrix = None

    def index_note(self, note_id: NoteId, text: str, embed, max_chars: int = DEFAULT_CHUNK_CHARS) -> int:
        """Chunk a note text and add one entry per chunk. Returns chunk count."""
        chunks = chunk_text(text, max_chars)
        for ordinal, chunk in enumerate(chunks):
            self.add_entry(note_id, ordinal, chunk, embed(chunk))
        return len(chunks)

    def _normalized_matrix(self) -> np.ndarray:
        if self._matrix is None:
            if not self._entries:
                self._matrix = np.zeros((0, self._dim or 0), dtype=np.float64)
            else:
                raw = np.asarray([e.vector for e in self._entries], dtype=np.float64)
                norms = np.linalg.norm(raw, axis=1, keepdims=True)
                norms[norms == 0.0] = 1.0
                self._matrix = raw / norms
        return self._matrix

    def search(self, query_vector, k: int) -> list[SearchHit]:
        """Exact top-k by cosine, one hit per note (max over its chunks).

        Ordering is deterministic: score descending, note_id ascending on
        ties. Cosine against a zero vector is defined as 0.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        if not self._entries:
            return []
        query = np.asarray(query_vector, dtype=np.float64)
        if query.shape != (self._dim,):
            raise DimensionMismatch(f"query dim {query.shape}, index dim {self._dim}")
        norm = np.linalg.norm(query)
        if norm > 0.0:
            query = query / norm
        scores = kernels.cosine_scores(self._normalized_matrix(), query)
        best: dict[NoteId, tuple[float, int]] = {}
        for entry, score in zip(self._entries, scores):
            score = float(score)
            current = best.get(entry.note_id)
            if current is None or score > current[0]:
                best[entry.note_id] = (score, entry.chunk_ordinal)
        ranked = sorted(best.items(), key=lambda item: (-item[1][0], item[0]))
        return [
            SearchHit(note_id=note_id, score=score, chunk_ordinal=ordinal)
            for note_id, (score, ordinal) in ranked[:k]
        ]

    def content_hash(self) -> str:
        payload = ";".join(
            f"{e.note_id}:{e.chunk_ordinal}:{e.text}:{','.join(repr(v) for v in e.vector)}"
            for e in self._entries
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()
