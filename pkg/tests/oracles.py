"""Independent reference implementations used as test oracles.

Everything here is deliberately naive: dense matrices instead of CSR,
pure-python loops instead of vectorized scans, full enumeration instead of
backtracking. The implementations share nothing with the package internals
beyond the public data model, so agreement is evidence, not tautology.
"""

from __future__ import annotations

import itertools
import math
import re

import numpy as np

from groundmem.gql.ast import Count, Literal, PropertyRef, Query, Variable, render_expression
from groundmem.models import format_rfc3339

# ---------------------------------------------------------------------------
# Dense personalized PageRank
# ---------------------------------------------------------------------------


def dense_pagerank(graph, seeds, damping=0.85, tol=1e-8, max_iter=100):
    """Dense-matrix power iteration over the undirected graph view.

    Returns {node_id: score} over every node. Mirrors the documented
    semantics (uniform teleport over unique seeds, dangling mass goes to
    the teleport vector) using an explicit dense transition matrix.
    """
    order = list(graph.note_ids())
    order.extend(entity.label for entity in graph.entities())
    pos = {node: i for i, node in enumerate(order)}
    n = len(order)
    adjacency = np.zeros((n, n), dtype=np.float64)
    for source, _, target in graph.edges():
        adjacency[pos[source], pos[target]] += 1.0
        adjacency[pos[target], pos[source]] += 1.0
    degree = adjacency.sum(axis=1)
    dangling = degree == 0.0
    transition = np.zeros((n, n), dtype=np.float64)
    nonzero = ~dangling
    transition[nonzero] = adjacency[nonzero] / degree[nonzero, None]

    teleport = np.zeros(n, dtype=np.float64)
    unique_seeds = list(dict.fromkeys(seeds))
    for seed in unique_seeds:
        teleport[pos[seed]] = 1.0 / len(unique_seeds)

    rank = teleport.copy()
    for _ in range(max_iter):
        dangling_mass = float(rank[dangling].sum())
        new_rank = (1.0 - damping) * teleport + damping * (
            transition.T @ rank + dangling_mass * teleport
        )
        delta = float(np.abs(new_rank - rank).sum())
        rank = new_rank
        if delta < tol:
            break
    return {node: float(rank[i]) for i, node in enumerate(order)}


# ---------------------------------------------------------------------------
# Exhaustive cosine top-k
# ---------------------------------------------------------------------------


def exhaustive_topk(entries, query, k):
    """Top-k (note_id, score) by cosine with per-note max over chunks.

    entries: iterable of (note_id, vector). Pure-python arithmetic.
    """
    query = list(float(x) for x in query)
    q_norm = math.sqrt(sum(x * x for x in query))
    best: dict[str, float] = {}
    for note_id, vector in entries:
        vector = list(float(x) for x in vector)
        v_norm = math.sqrt(sum(x * x for x in vector))
        if q_norm == 0.0 or v_norm == 0.0:
            score = 0.0
        else:
            score = sum(a * b for a, b in zip(vector, query)) / (v_norm * q_norm)
        if note_id not in best or score > best[note_id]:
            best[note_id] = score
    ranked = sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:k]


# ---------------------------------------------------------------------------
# Mention counting by regex
# ---------------------------------------------------------------------------

MENTION_RE = re.compile(r"\[([a-z][a-z0-9]*(?:_[a-z0-9]+)*_[0-9]+):(Agent|Object|Action)\]")


def regex_mentions(text):
    """(label, type) pairs of every well-formed annotation in order."""
    return [(m.group(1), m.group(2)) for m in MENTION_RE.finditer(text)]


def regex_plain(text):
    """Annotation-stripped text via regex substitution."""
    return MENTION_RE.sub(lambda m: m.group(1), text)


# ---------------------------------------------------------------------------
# Structural graph equality
# ---------------------------------------------------------------------------


def graph_fingerprint(graph):
    return {
        "notes": sorted(
            (
                n.id,
                n.caption,
                n.plain_caption,
                tuple(n.data_files),
                format_rfc3339(n.created_at),
                n.sequence_index,
                n.stream_id,
            )
            for n in graph.notes()
        ),
        "entities": sorted(
            (e.label, e.entity_type.value, e.first_seen, e.mention_count)
            for e in graph.entities()
        ),
        "edges": sorted((s, k.value, t) for s, k, t in graph.edges()),
    }


def graphs_equal(left, right):
    return graph_fingerprint(left) == graph_fingerprint(right)


# ---------------------------------------------------------------------------
# Brute-force graph statistics
# ---------------------------------------------------------------------------


def brute_stats(graph):
    notes = list(graph.notes())
    entity_counts = {"Agent": 0, "Object": 0, "Action": 0}
    for entity in graph.entities():
        entity_counts[entity.entity_type.value] += 1
    edge_counts = {"HAS_PREVIOUS": 0, "HAS_ELEMENT": 0}
    for _, kind, _ in graph.edges():
        edge_counts[kind.value] += 1
    # Chains partition the notes; a chain of length L has L-1 links.
    chain_count = len(notes) - edge_counts["HAS_PREVIOUS"]
    return {
        "image_count": len(notes),
        "entity_counts_by_type": entity_counts,
        "edge_counts_by_kind": edge_counts,
        "chain_count": chain_count,
    }


# ---------------------------------------------------------------------------
# Naive nested-loop query interpreter
# ---------------------------------------------------------------------------

_NOTE_LABELS = ("Image", "MemoryNote")
_ENTITY_LABELS = ("Agent", "Object", "Action")


def _flatten(graph):
    """Extract a plain-dict view of the graph for the interpreter."""
    kinds = {}
    props = {}
    for note in graph.notes():
        kinds[note.id] = "note"
        props[note.id] = {
            "id": note.id,
            "caption": note.plain_caption,
            "raw_caption": note.caption,
            "created_at": format_rfc3339(note.created_at),
            "sequence_index": note.sequence_index,
            "stream_id": note.stream_id,
        }
    for entity in graph.entities():
        kinds[entity.label] = entity.entity_type.value
        props[entity.label] = {
            "id": entity.label,
            "label": entity.label,
            "type": entity.entity_type.value,
            "first_seen": entity.first_seen,
            "mention_count": entity.mention_count,
        }
    edges = [(s, k.name, t) for s, k, t in graph.edges()]
    return kinds, props, edges


def _scalar_equal(left, right):
    if left is None or right is None:
        return False
    if isinstance(left, bool) or isinstance(right, bool):
        return isinstance(left, bool) and isinstance(right, bool) and left == right
    if isinstance(left, int) and isinstance(right, int):
        return left == right
    if isinstance(left, str) and isinstance(right, str):
        return left == right
    return False


def _value_key(value):
    if isinstance(value, bool):
        return (0, value)
    if isinstance(value, int):
        return (1, value)
    if isinstance(value, str):
        return (2, value)
    return (3, 0)


def _row_key(row):
    return tuple(_value_key(v) for v in row)


def ref_evaluate(ast: Query, graph):
    """Reference interpreter: full enumeration of node and edge assignments.

    Returns (columns, rows) with the documented deterministic ordering.
    Intended for graphs of ~30 nodes and patterns of at most 3 hops.
    """
    kinds, props, edges = _flatten(graph)
    all_ids = list(kinds)

    def label_ok(node_id, label):
        if label is None:
            return True
        if label in _NOTE_LABELS:
            return kinds[node_id] == "note"
        if label in _ENTITY_LABELS:
            return kinds[node_id] == label
        return False  # unknown label: matches nothing

    def pattern_assignments(pattern, base):
        found = []
        node_patterns = pattern.nodes
        for combo in itertools.product(all_ids, repeat=len(node_patterns)):
            binding = dict(base)
            ok = True
            for node_pat, node_id in zip(node_patterns, combo):
                if not label_ok(node_id, node_pat.label):
                    ok = False
                    break
                if node_pat.variable is not None:
                    bound = binding.get(node_pat.variable)
                    if bound is not None and bound != node_id:
                        ok = False
                        break
                    binding[node_pat.variable] = node_id
                for key, literal in node_pat.properties:
                    if not _scalar_equal(props[node_id].get(key), literal.value):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            # Candidate edges per hop; a full assignment needs pairwise-
            # distinct edges across the hops of this pattern.
            per_hop = []
            for hop, rel in enumerate(pattern.rels):
                a, b = combo[hop], combo[hop + 1]
                candidates = []
                for idx, (source, kind, target) in enumerate(edges):
                    if rel.kind is not None and kind != rel.kind:
                        continue
                    forward = (source, target) == (a, b)
                    backward = (source, target) == (b, a)
                    if rel.direction == "out" and forward:
                        candidates.append(idx)
                    elif rel.direction == "in" and backward:
                        candidates.append(idx)
                    elif rel.direction == "any" and (forward or backward):
                        candidates.append(idx)
                per_hop.append(candidates)
            for choice in itertools.product(*per_hop):
                if len(set(choice)) == len(choice):
                    found.append(binding)
        return found

    bindings = [{}]
    for pattern in ast.patterns:
        bindings = [ext for base in bindings for ext in pattern_assignments(pattern, base)]

    def resolve(expr, binding):
        if isinstance(expr, Literal):
            return expr.value
        if isinstance(expr, Variable):
            return binding.get(expr.name)
        node_id = binding.get(expr.variable)
        if node_id is None:
            return None
        return props[node_id].get(expr.name)

    def where_holds(binding):
        for cond in ast.where:
            left = resolve(cond.left, binding)
            right = resolve(cond.right, binding)
            if left is None or right is None:
                return False
            equal = _scalar_equal(left, right)
            if cond.op == "=" and not equal:
                return False
            if cond.op == "<>" and equal:
                return False
        return True

    bindings = [b for b in bindings if where_holds(b)]
    columns = tuple(render_expression(item.expression) for item in ast.return_items)

    if any(isinstance(item.expression, Count) for item in ast.return_items):
        count_expr = ast.return_items[0].expression
        if count_expr.target is None:
            total = len(bindings)
        else:
            values = [resolve(count_expr.target, b) for b in bindings]
            values = [v for v in values if v is not None]
            if count_expr.distinct:
                total = len({_value_key(v) for v in values})
            else:
                total = len(values)
        rows = [(total,)]
    else:
        rows = [
            tuple(resolve(item.expression, b) for item in ast.return_items) for b in bindings
        ]
        if ast.distinct:
            seen = {}
            for row in rows:
                seen.setdefault(_row_key(row), row)
            rows = list(seen.values())

    rows.sort(key=_row_key)
    if ast.order_by:
        column_index = {}
        for i, item in enumerate(ast.return_items):
            column_index[item.expression] = i
        for term in reversed(ast.order_by):
            idx = column_index[term.expression]
            rows.sort(key=lambda row: _value_key(row[idx]), reverse=term.descending)
    if ast.limit is not None:
        rows = rows[: ast.limit]
    return columns, tuple(tuple(row) for row in rows)
