"""Read-only graph query subset: lexer, parser, AST, evaluator.

The grammar is documented in docs/query_grammar.md. Only MATCH / WHERE /
RETURN / ORDER BY / LIMIT are accepted; every mutation keyword is
rejected before parsing.
"""

from .ast import (
    Comparison,
    Count,
    Literal,
    NodePattern,
    OrderBy,
    PathPattern,
    PropertyRef,
    Query,
    RelPattern,
    ReturnItem,
    Variable,
    render,
)
from .errors import ForbiddenClause, QueryError, QuerySyntaxError, UnboundVariable
from .evaluator import NODE_LABELS, EDGE_KINDS, ResultTable, evaluate, explain
from .parser import parse_query

__all__ = [
    "Comparison",
    "Count",
    "Literal",
    "NodePattern",
    "OrderBy",
    "PathPattern",
    "PropertyRef",
    "Query",
    "RelPattern",
    "ReturnItem",
    "Variable",
    "render",
    "ForbiddenClause",
    "QueryError",
    "QuerySyntaxError",
    "UnboundVariable",
    "NODE_LABELS",
    "EDGE_KINDS",
    "ResultTable",
    "evaluate",
    "explain",
    "parse_query",
]
