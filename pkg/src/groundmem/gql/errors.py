"""Query language error classes."""

from __future__ import annotations

from ..models import GroundMemError


class QueryError(GroundMemError):
    pass


class QuerySyntaxError(QueryError):
    """Positioned syntax error with the tokens that would have been accepted."""

    def __init__(self, message: str, line: int, column: int, expected: list[str] | None = None):
        self.line = line
        self.column = column
        self.expected = expected or []
        suffix = f" (expected {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"line {line}, column {column}: {message}{suffix}")


class ForbiddenClause(QueryError):
    """Mutation keyword in a read-only query."""

    def __init__(self, keyword: str, line: int, column: int):
        self.keyword = keyword
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: mutation keyword {keyword} is not allowed")


class UnboundVariable(QueryError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"variable {name!r} is not bound in MATCH")
