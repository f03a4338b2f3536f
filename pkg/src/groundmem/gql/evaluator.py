"""Query evaluation against a MemoryGraph.

Semantics, pinned for differential testing against a brute-force reference:

- Bindings are homomorphisms: two pattern variables may map to the same node.
- Within one path pattern instance, relationship slots bind pairwise-distinct
  edges; an undirected hop does not let the same edge serve two slots.
- Comma-separated patterns join on shared variables.
- Unknown node labels or edge kinds produce zero matches and a warning.
- WHERE comparisons involving null are false; booleans never equal integers.
- Projection: a bare variable projects the node id, a property reference
  projects the property value or null.
- count(*) counts bindings, count(expr) counts non-null values,
  count(DISTINCT expr) counts distinct non-null values; a count projection
  yields exactly one row even over zero bindings.
- Row order: ORDER BY terms (stable, ties broken by the whole projected row),
  otherwise lexicographic on the projected row. Values order by type rank
  (booleans, integers, strings, then nulls) and within rank by value.
- LIMIT applies last.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..graph import MemoryGraph
from ..models import EntityType, format_rfc3339
from .ast import (
    Comparison,
    Count,
    Literal,
    NodePattern,
    PathPattern,
    PropertyRef,
    Query,
    ScalarValue,
    Variable,
    render_expression,
)

NODE_LABELS = ("Image", "MemoryNote", "Agent", "Object", "Action")
EDGE_KINDS = ("HAS_PREVIOUS", "HAS_ELEMENT")

# Provenance rows attached to a result table are capped so an answer over a
# large binding set stays a citation, not a dump.
SOURCE_NOTE_CAP = 10

_ENTITY_LABELS = {
    "Agent": EntityType.AGENT,
    "Object": EntityType.OBJECT,
    "Action": EntityType.ACTION,
}


@dataclass(frozen=True)
class ResultTable:
    """Tabular query result with evaluation warnings and note provenance."""

    columns: tuple[str, ...]
    rows: tuple[tuple[ScalarValue, ...], ...]
    warnings: tuple[str, ...] = ()
    source_note_ids: tuple[str, ...] = ()

    def single_value(self) -> ScalarValue | None:
        if len(self.rows) == 1 and len(self.columns) == 1:
            return self.rows[0][0]
        return None

    def as_dict(self) -> dict[str, object]:
        return {
            "columns": list(self.columns),
            "rows": [list(row) for row in self.rows],
            "warnings": list(self.warnings),
            "source_note_ids": list(self.source_note_ids),
        }


Edge = tuple[str, str, str]  # (source, kind name, target)


@dataclass
class _GraphView:
    """Adjacency snapshot the matcher walks; built once per evaluate call."""

    node_ids: list[str]
    kinds: dict[str, str]  # node id -> "note" | entity type value
    out_edges: dict[str, list[Edge]] = field(default_factory=dict)
    in_edges: dict[str, list[Edge]] = field(default_factory=dict)


def _build_view(graph: MemoryGraph) -> _GraphView:
    node_ids: list[str] = []
    kinds: dict[str, str] = {}
    for note in graph.notes():
        node_ids.append(note.id)
        kinds[note.id] = "note"
    for entity in graph.entities():
        node_ids.append(entity.label)
        kinds[entity.label] = entity.entity_type.value
    view = _GraphView(node_ids=node_ids, kinds=kinds)
    for node_id in node_ids:
        view.out_edges[node_id] = []
        view.in_edges[node_id] = []
    for source, kind, target in graph.edges():
        edge: Edge = (source, kind.name, target)
        view.out_edges[source].append(edge)
        view.in_edges[target].append(edge)
    return view


def _node_matches_label(view: _GraphView, node_id: str, label: str | None) -> bool:
    if label is None:
        return True
    kind = view.kinds[node_id]
    if label in ("Image", "MemoryNote"):
        return kind == "note"
    entity_type = _ENTITY_LABELS.get(label)
    return entity_type is not None and kind == entity_type.value


def _node_properties(graph: MemoryGraph, view: _GraphView, node_id: str) -> dict[str, ScalarValue]:
    if view.kinds[node_id] == "note":
        note = graph.get_note(node_id)
        return {
            "id": note.id,
            "caption": note.plain_caption,
            "raw_caption": note.caption,
            "created_at": format_rfc3339(note.created_at),
            "sequence_index": note.sequence_index,
            "stream_id": note.stream_id,
        }
    entity = graph.get_entity(node_id)
    return {
        "id": entity.label,
        "label": entity.label,
        "type": entity.entity_type.value,
        "first_seen": entity.first_seen,
        "mention_count": entity.mention_count,
    }


def _scalar_equal(left: ScalarValue, right: ScalarValue) -> bool:
    if left is None or right is None:
        return False
    if isinstance(left, bool) or isinstance(right, bool):
        return isinstance(left, bool) and isinstance(right, bool) and left == right
    if isinstance(left, int) and isinstance(right, int):
        return left == right
    if isinstance(left, str) and isinstance(right, str):
        return left == right
    return False


def _type_rank(value: ScalarValue) -> int:
    if isinstance(value, bool):
        return 0
    if isinstance(value, int):
        return 1
    if isinstance(value, str):
        return 2
    return 3


def _value_key(value: ScalarValue) -> tuple[int, object]:
    rank = _type_rank(value)
    return (rank, 0 if value is None else value)


def _row_key(row: tuple[ScalarValue, ...]) -> tuple[tuple[int, object], ...]:
    return tuple(_value_key(value) for value in row)


class _Matcher:
    def __init__(self, graph: MemoryGraph, view: _GraphView, warnings: list[str]) -> None:
        self.graph = graph
        self.view = view
        self.warnings = warnings

    def _warn_unknown(self, pattern: PathPattern) -> bool:
        """Emit warnings for unknown vocabulary; True when the pattern cannot match."""
        dead = False
        for node in pattern.nodes:
            if node.label is not None and node.label not in NODE_LABELS:
                self.warnings.append(f"unknown node label {node.label!r}; no matches")
                dead = True
        for rel in pattern.rels:
            if rel.kind is not None and rel.kind not in EDGE_KINDS:
                self.warnings.append(f"unknown relationship kind {rel.kind!r}; no matches")
                dead = True
        return dead

    def _node_ok(self, node: NodePattern, node_id: str, binding: dict[str, str]) -> bool:
        if not _node_matches_label(self.view, node_id, node.label):
            return False
        if node.variable is not None:
            bound = binding.get(node.variable)
            if bound is not None and bound != node_id:
                return False
        if node.properties:
            props = _node_properties(self.graph, self.view, node_id)
            for key, literal in node.properties:
                if not _scalar_equal(props.get(key), literal.value):
                    return False
        return True

    def match_pattern(self, pattern: PathPattern, binding: dict[str, str]) -> list[dict[str, str]]:
        if self._warn_unknown(pattern):
            return []
        results: list[dict[str, str]] = []

        first = pattern.nodes[0]
        if first.variable is not None and first.variable in binding:
            starts = [binding[first.variable]]
        else:
            starts = self.view.node_ids

        def extend(
            index: int, node_id: str, current: dict[str, str], used: frozenset[Edge]
        ) -> None:
            node = pattern.nodes[index]
            if not self._node_ok(node, node_id, current):
                return
            scoped = dict(current)
            if node.variable is not None:
                scoped[node.variable] = node_id
            if index == len(pattern.rels):
                results.append(scoped)
                return
            rel = pattern.rels[index]
            candidates: list[tuple[Edge, str]] = []
            if rel.direction in ("out", "any"):
                for edge in self.view.out_edges[node_id]:
                    candidates.append((edge, edge[2]))
            if rel.direction in ("in", "any"):
                for edge in self.view.in_edges[node_id]:
                    candidates.append((edge, edge[0]))
            for edge, neighbor in candidates:
                if rel.kind is not None and edge[1] != rel.kind:
                    continue
                if edge in used:
                    continue
                extend(index + 1, neighbor, scoped, used | {edge})

        for start in starts:
            extend(0, start, binding, frozenset())
        return results

    def match_all(self, patterns: tuple[PathPattern, ...]) -> list[dict[str, str]]:
        bindings: list[dict[str, str]] = [{}]
        for pattern in patterns:
            next_bindings: list[dict[str, str]] = []
            for binding in bindings:
                next_bindings.extend(self.match_pattern(pattern, binding))
            bindings = next_bindings
            if not bindings:
                break
        return bindings


def _resolve(
    expr: Literal | Variable | PropertyRef,
    binding: dict[str, str],
    graph: MemoryGraph,
    view: _GraphView,
) -> ScalarValue:
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Variable):
        return binding.get(expr.name)
    node_id = binding.get(expr.variable)
    if node_id is None:
        return None
    return _node_properties(graph, view, node_id).get(expr.name)


def _where_holds(
    conditions: tuple[Comparison, ...],
    binding: dict[str, str],
    graph: MemoryGraph,
    view: _GraphView,
) -> bool:
    for cond in conditions:
        left = _resolve(cond.left, binding, graph, view)
        right = _resolve(cond.right, binding, graph, view)
        if left is None or right is None:
            return False
        equal = _scalar_equal(left, right)
        if cond.op == "=" and not equal:
            return False
        if cond.op == "<>" and equal:
            return False
    return True


def _collect_source_notes(bindings: list[dict[str, str]], view: _GraphView) -> tuple[str, ...]:
    seen: set[str] = set()
    for binding in bindings:
        for node_id in binding.values():
            if view.kinds.get(node_id) == "note":
                seen.add(node_id)
    return tuple(sorted(seen)[:SOURCE_NOTE_CAP])


def evaluate(ast: Query, graph: MemoryGraph) -> ResultTable:
    """Run a parsed query against ``graph`` and return its result table."""
    warnings: list[str] = []
    view = _build_view(graph)
    matcher = _Matcher(graph, view, warnings)
    bindings = matcher.match_all(ast.patterns)
    bindings = [b for b in bindings if _where_holds(ast.where, b, graph, view)]

    columns = tuple(render_expression(item.expression) for item in ast.return_items)
    source_notes = _collect_source_notes(bindings, view)

    if any(isinstance(item.expression, Count) for item in ast.return_items):
        count_expr = ast.return_items[0].expression
        assert isinstance(count_expr, Count)
        if count_expr.target is None:
            total = len(bindings)
        else:
            values = [
                _resolve(count_expr.target, binding, graph, view) for binding in bindings
            ]
            values = [value for value in values if value is not None]
            if count_expr.distinct:
                total = len({_value_key(value) for value in values})
            else:
                total = len(values)
        rows: list[tuple[ScalarValue, ...]] = [(total,)]
    else:
        rows = [
            tuple(_resolve(item.expression, binding, graph, view) for item in ast.return_items)
            for binding in bindings
        ]
        if ast.distinct:
            unique: dict[tuple[tuple[int, object], ...], tuple[ScalarValue, ...]] = {}
            for row in rows:
                unique.setdefault(_row_key(row), row)
            rows = list(unique.values())

    rows.sort(key=_row_key)
    if ast.order_by:
        index_of = {item.expression: i for i, item in enumerate(ast.return_items)}
        for term in reversed(ast.order_by):
            column = index_of[term.expression]
            rows.sort(key=lambda row: _value_key(row[column]), reverse=term.descending)
    if ast.limit is not None:
        rows = rows[: ast.limit]

    return ResultTable(
        columns=columns,
        rows=tuple(rows),
        warnings=tuple(dict.fromkeys(warnings)),
        source_note_ids=source_notes,
    )


def explain(ast: Query, graph: MemoryGraph | None = None) -> str:
    """Render a human-readable evaluation plan for a parsed query."""
    view = _build_view(graph) if graph is not None else None
    lines: list[str] = ["plan:"]
    step = 1
    for pattern in ast.patterns:
        shape = " ".join(
            f"({node.variable or ''}{':' + node.label if node.label else ''})"
            for node in pattern.nodes
        )
        if view is not None:
            estimate = 1
            for node in pattern.nodes:
                estimate *= sum(
                    1 for node_id in view.node_ids if _node_matches_label(view, node_id, node.label)
                )
            detail = f"est. {estimate} candidate bindings"
        else:
            detail = "est. unknown"
        hops = len(pattern.rels)
        lines.append(f"  {step}. scan pattern {shape} ({hops} hop{'s' if hops != 1 else ''}, {detail})")
        step += 1
    if ast.where:
        lines.append(f"  {step}. filter WHERE ({len(ast.where)} condition{'s' if len(ast.where) != 1 else ''})")
        step += 1
    projection = ", ".join(render_expression(item.expression) for item in ast.return_items)
    prefix = "DISTINCT " if ast.distinct else ""
    lines.append(f"  {step}. project RETURN {prefix}{projection}")
    step += 1
    if ast.order_by:
        lines.append(f"  {step}. sort ORDER BY")
        step += 1
    if ast.limit is not None:
        lines.append(f"  {step}. limit {ast.limit}")
    return "\n".join(lines)
