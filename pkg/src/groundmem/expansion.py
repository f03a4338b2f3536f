"""Personalized PageRank expansion of semantic-search hits.

The memory graph is viewed as undirected: relevance flows both along and
against HAS_PREVIOUS / HAS_ELEMENT edges. Teleport mass is uniform over
the seed set, so nodes unreachable from every seed score zero. Entity
nodes conduct rank but only memory notes are returned as context.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .graph import MemoryGraph, UnknownNote
from .models import GroundMemError, NoteId


class EmptySeedSet(GroundMemError):
    pass


class EmptyGraph(GroundMemError):
    pass


@dataclass(frozen=True)
class ExpansionParams:
    damping: float = 0.85
    tol: float = 1e-8
    max_iter: int = 100
    top_m: int = 10

    def validate(self) -> None:
        if not 0.0 < self.damping < 1.0:
            raise ValueError("damping must be in (0, 1)")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.top_m < 1:
            raise ValueError("top_m must be >= 1")


def _node_order(graph: MemoryGraph) -> list[str]:
    order = graph.note_ids()
    order.extend(entity.label for entity in graph.entities())
    return order


def _csr_adjacency(graph: MemoryGraph, order: list[str]) -> tuple[np.ndarray, np.ndarray]:
    index = {node: i for i, node in enumerate(order)}
    neighbors: list[list[int]] = [[] for _ in order]
    for source, _, target in graph.edges():
        s, t = index[source], index[target]
        neighbors[s].append(t)
        neighbors[t].append(s)
    indptr = np.zeros(len(order) + 1, dtype=np.int64)
    for i, adj in enumerate(neighbors):
        indptr[i + 1] = indptr[i] + len(adj)
    indices = np.empty(int(indptr[-1]), dtype=np.int64)
    pos = 0
    for adj in neighbors:
        for t in adj:
            indices[pos] = t
            pos += 1
    return indptr, indices


def personalized_pagerank(
    graph: MemoryGraph,
    seeds: list[str],
    params: ExpansionParams | None = None,
) -> dict[str, float]:
    """Seed-restricted PageRank scores over every graph node.

    Scores are non-negative and sum to 1. Raises EmptySeedSet on an
    empty seed list, EmptyGraph on an empty graph, UnknownNote when a
    seed is not a graph node.
    """
    params = params or ExpansionParams()
    params.validate()
    if len(graph) == 0:
        raise EmptyGraph("personalized pagerank needs at least one node")
    if not seeds:
        raise EmptySeedSet("seed set must be non-empty")
    order = _node_order(graph)
    index = {node: i for i, node in enumerate(order)}
    seed_ids: list[int] = []
    seen: set[str] = set()
    for seed in seeds:
        if seed not in index:
            raise UnknownNote(seed)
        if seed not in seen:
            seen.add(seed)
            seed_ids.append(index[seed])
    teleport = np.zeros(len(order), dtype=np.float64)
    teleport[seed_ids] = 1.0 / len(seed_ids)
    indptr, indices = _csr_adjacency(graph, order)
    scores, _ = kernels.pagerank_power(
        indptr, indices, teleport, params.damping, params.tol, params.max_iter
    )
    return {node: float(scores[i]) for i, node in enumerate(order)}


def expand(
    graph: MemoryGraph,
    seed_notes: list[NoteId],
    params: ExpansionParams | None = None,
) -> list[NoteId]:
    """Seeds plus the top_m highest-ranked reachable non-seed notes.

    Order: seeds first (original order, de-duplicated), then expansion
    notes by descending score with note_id ascending as tie-break.
    Unreachable notes (score 0) are never returned.
    """
    params = params or ExpansionParams()
    if not seed_notes:
        raise EmptySeedSet("seed set must be non-empty")
    ordered_seeds: list[NoteId] = []
    seen: set[NoteId] = set()
    for note_id in seed_notes:
        graph.get_note(note_id)
        if note_id not in seen:
            seen.add(note_id)
            ordered_seeds.append(note_id)
    scores = personalized_pagerank(graph, ordered_seeds, params)
    candidates = [
        (note_id, scores[note_id])
        for note_id in graph.note_ids()
        if note_id not in seen and scores[note_id] > 0.0
    ]
    candidates.sort(key=lambda item: (-item[1], item[0]))
    return ordered_seeds + [note_id for note_id, _ in candidates[: params.top_m]]
