"""Query AST and its canonical printer.

render() emits the canonical text form; parse_query(render(ast)) == ast
for every valid AST, which pins the printer/parser round-trip.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

ScalarValue = Union[str, int, bool, None]


@dataclass(frozen=True)
class Literal:
    value: ScalarValue


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class PropertyRef:
    variable: str
    name: str


@dataclass(frozen=True)
class Count:
    """count(*) when target is None, else count([DISTINCT] expr)."""

    target: Optional[Union[Variable, PropertyRef]] = None
    distinct: bool = False


Expression = Union[Variable, PropertyRef, Count]
Operand = Union[Variable, PropertyRef, Literal]


@dataclass(frozen=True)
class NodePattern:
    variable: Optional[str] = None
    label: Optional[str] = None
    properties: tuple[tuple[str, Literal], ...] = ()


@dataclass(frozen=True)
class RelPattern:
    """direction: 'out' for -[..]->, 'in' for <-[..]-, 'any' for -[..]-."""

    direction: str = "out"
    kind: Optional[str] = None


@dataclass(frozen=True)
class PathPattern:
    nodes: tuple[NodePattern, ...]
    rels: tuple[RelPattern, ...] = ()


@dataclass(frozen=True)
class Comparison:
    left: Operand
    op: str  # "=" or "<>"
    right: Operand


@dataclass(frozen=True)
class ReturnItem:
    expression: Expression


@dataclass(frozen=True)
class OrderBy:
    expression: Expression
    descending: bool = False


@dataclass(frozen=True)
class Query:
    patterns: tuple[PathPattern, ...]
    where: tuple[Comparison, ...] = ()
    distinct: bool = False
    return_items: tuple[ReturnItem, ...] = ()
    order_by: tuple[OrderBy, ...] = ()
    limit: Optional[int] = None

    def bound_variables(self) -> set[str]:
        names: set[str] = set()
        for pattern in self.patterns:
            for node in pattern.nodes:
                if node.variable:
                    names.add(node.variable)
        return names


def render_literal(literal: Literal) -> str:
    value = literal.value
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    escaped = value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{escaped}"'


def render_expression(expr: Union[Expression, Literal]) -> str:
    if isinstance(expr, Literal):
        return render_literal(expr)
    if isinstance(expr, Variable):
        return expr.name
    if isinstance(expr, PropertyRef):
        return f"{expr.variable}.{expr.name}"
    if isinstance(expr, Count):
        if expr.target is None:
            return "count(*)"
        inner = render_expression(expr.target)
        return f"count(DISTINCT {inner})" if expr.distinct else f"count({inner})"
    raise TypeError(f"unknown expression {expr!r}")


def _render_node(node: NodePattern) -> str:
    inner = node.variable or ""
    if node.label:
        inner += f":{node.label}"
    if node.properties:
        props = ", ".join(f"{key}: {render_literal(value)}" for key, value in node.properties)
        inner = f"{inner} {{{props}}}" if inner else f"{{{props}}}"
    return f"({inner})"


def _render_rel(rel: RelPattern) -> str:
    body = f"[:{rel.kind}]" if rel.kind else "[]"
    if rel.direction == "out":
        return f"-{body}->"
    if rel.direction == "in":
        return f"<-{body}-"
    return f"-{body}-"


def render(query: Query) -> str:
    """Canonical text form of a query AST."""
    parts: list[str] = ["MATCH "]
    rendered_patterns = []
    for pattern in query.patterns:
        bits = [_render_node(pattern.nodes[0])]
        for rel, node in zip(pattern.rels, pattern.nodes[1:]):
            bits.append(_render_rel(rel))
            bits.append(_render_node(node))
        rendered_patterns.append("".join(bits))
    parts.append(", ".join(rendered_patterns))
    if query.where:
        conditions = " AND ".join(
            f"{render_expression(c.left)} {c.op} {render_expression(c.right)}"
            for c in query.where
        )
        parts.append(f" WHERE {conditions}")
    parts.append(" RETURN ")
    if query.distinct:
        parts.append("DISTINCT ")
    parts.append(", ".join(render_expression(item.expression) for item in query.return_items))
    if query.order_by:
        terms = ", ".join(
            f"{render_expression(term.expression)} {'DESC' if term.descending else 'ASC'}"
            for term in query.order_by
        )
        parts.append(f" ORDER BY {terms}")
    if query.limit is not None:
        parts.append(f" LIMIT {query.limit}")
    return "".join(parts)
