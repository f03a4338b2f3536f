"""Recursive-descent parser producing the query AST.

Read-only subset: a single MATCH over comma-separated path patterns (at most
three relationships each), an optional WHERE conjunction of equality tests,
a RETURN projection with optional DISTINCT and count(), optional ORDER BY
over returned expressions, and an optional LIMIT. Queries containing
mutation keywords are rejected outright.
"""

from __future__ import annotations

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
)
from .errors import ForbiddenClause, QuerySyntaxError, UnboundVariable
from .lexer import Token, tokenize

MUTATION_KEYWORDS = frozenset({"CREATE", "DELETE", "SET", "MERGE", "REMOVE"})

MAX_RELS_PER_PATTERN = 3

_KEYWORDS = frozenset(
    {
        "MATCH",
        "WHERE",
        "RETURN",
        "DISTINCT",
        "ORDER",
        "BY",
        "ASC",
        "DESC",
        "LIMIT",
        "AND",
        "COUNT",
        "TRUE",
        "FALSE",
        "NULL",
    }
)


class _Parser:
    def __init__(self, tokens: list[Token]) -> None:
        self.tokens = tokens
        self.pos = 0

    # Token plumbing.

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.type != "EOF":
            self.pos += 1
        return tok

    def error(self, message: str, token: Token, expected: tuple[str, ...] = ()) -> QuerySyntaxError:
        return QuerySyntaxError(message, token.line, token.column, expected)

    def expect(self, token_type: str, expected_desc: str | None = None) -> Token:
        tok = self.peek()
        if tok.type != token_type:
            desc = expected_desc or token_type
            found = tok.text or "end of input"
            raise self.error(f"expected {desc}, found {found!r}", tok, (desc,))
        return self.advance()

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.type == "IDENT" and tok.text.upper() == word

    def expect_keyword(self, word: str) -> Token:
        tok = self.peek()
        if not self.at_keyword(word):
            found = tok.text or "end of input"
            raise self.error(f"expected {word}, found {found!r}", tok, (word,))
        return self.advance()

    def take_ident(self, what: str) -> Token:
        tok = self.peek()
        if tok.type != "IDENT":
            found = tok.text or "end of input"
            raise self.error(f"expected {what}, found {found!r}", tok, (what,))
        if tok.text.upper() in _KEYWORDS:
            raise self.error(f"keyword {tok.text!r} cannot be used as {what}", tok, (what,))
        return self.advance()

    # Grammar productions.

    def parse(self) -> Query:
        self.expect_keyword("MATCH")
        patterns = [self.path_pattern()]
        while self.peek().type == ",":
            self.advance()
            patterns.append(self.path_pattern())
        where: tuple[Comparison, ...] = ()
        if self.at_keyword("WHERE"):
            self.advance()
            conditions = [self.comparison()]
            while self.at_keyword("AND"):
                self.advance()
                conditions.append(self.comparison())
            where = tuple(conditions)
        self.expect_keyword("RETURN")
        distinct = False
        if self.at_keyword("DISTINCT"):
            self.advance()
            distinct = True
        items = [self.return_item()]
        while self.peek().type == ",":
            self.advance()
            items.append(self.return_item())
        order_by: tuple[OrderBy, ...] = ()
        if self.at_keyword("ORDER"):
            self.advance()
            self.expect_keyword("BY")
            orders = [self.order_term()]
            while self.peek().type == ",":
                self.advance()
                orders.append(self.order_term())
            order_by = tuple(orders)
        limit: int | None = None
        if self.at_keyword("LIMIT"):
            self.advance()
            tok = self.expect("INT", "integer limit")
            limit = int(tok.value)  # type: ignore[arg-type]
            if limit < 0:
                raise self.error("LIMIT must be non-negative", tok)
        tok = self.peek()
        if tok.type != "EOF":
            found = tok.text or "end of input"
            raise self.error(f"unexpected trailing input {found!r}", tok, ("end of query",))
        return Query(
            patterns=tuple(patterns),
            where=where,
            distinct=distinct,
            return_items=tuple(items),
            order_by=order_by,
            limit=limit,
        )

    def path_pattern(self) -> PathPattern:
        nodes = [self.node_pattern()]
        rels: list[RelPattern] = []
        while self.peek().type in ("-", "<-"):
            if len(rels) >= MAX_RELS_PER_PATTERN:
                raise self.error(
                    f"a pattern may contain at most {MAX_RELS_PER_PATTERN} relationships",
                    self.peek(),
                )
            rels.append(self.rel_pattern())
            nodes.append(self.node_pattern())
        return PathPattern(nodes=tuple(nodes), rels=tuple(rels))

    def node_pattern(self) -> NodePattern:
        self.expect("(", "'('")
        variable: str | None = None
        label: str | None = None
        tok = self.peek()
        if tok.type == "IDENT" and tok.text.upper() not in _KEYWORDS:
            variable = self.advance().text
        if self.peek().type == ":":
            self.advance()
            label = self.take_ident("node label").text
        properties: list[tuple[str, Literal]] = []
        if self.peek().type == "{":
            self.advance()
            if self.peek().type != "}":
                properties.append(self.property_entry())
                while self.peek().type == ",":
                    self.advance()
                    properties.append(self.property_entry())
            self.expect("}", "'}'")
        self.expect(")", "')'")
        return NodePattern(variable=variable, label=label, properties=tuple(properties))

    def property_entry(self) -> tuple[str, Literal]:
        key = self.take_ident("property name").text
        self.expect(":", "':'")
        return key, self.literal()

    def rel_pattern(self) -> RelPattern:
        tok = self.advance()
        if tok.type == "<-":
            kind = self.rel_body()
            self.expect("-", "'-'")
            return RelPattern(direction="in", kind=kind)
        if tok.type == "-":
            kind = self.rel_body()
            closer = self.peek()
            if closer.type == "->":
                self.advance()
                return RelPattern(direction="out", kind=kind)
            if closer.type == "-":
                self.advance()
                return RelPattern(direction="any", kind=kind)
            found = closer.text or "end of input"
            raise self.error(f"expected '->' or '-', found {found!r}", closer, ("->", "-"))
        raise self.error("expected relationship pattern", tok, ("-", "<-"))

    def rel_body(self) -> str | None:
        """Parse ``[:KIND]`` or ``[]`` between relationship dashes."""
        self.expect("[", "'['")
        kind: str | None = None
        tok = self.peek()
        if tok.type == "IDENT" and tok.text.upper() not in _KEYWORDS:
            # Relationship variable; accepted and discarded (never referenced).
            self.advance()
        if self.peek().type == ":":
            self.advance()
            kind = self.take_ident("relationship kind").text
        self.expect("]", "']'")
        return kind

    def comparison(self) -> Comparison:
        left = self.operand()
        tok = self.peek()
        if tok.type == "=":
            self.advance()
            op = "="
        elif tok.type == "<>":
            self.advance()
            op = "<>"
        else:
            found = tok.text or "end of input"
            raise self.error(f"expected '=' or '<>', found {found!r}", tok, ("=", "<>"))
        right = self.operand()
        return Comparison(left=left, op=op, right=right)

    def operand(self) -> Literal | Variable | PropertyRef:
        tok = self.peek()
        if tok.type in ("STRING", "INT", "-") or (
            tok.type == "IDENT" and tok.text.upper() in ("TRUE", "FALSE", "NULL")
        ):
            return self.literal()
        if tok.type == "IDENT":
            return self.var_or_property()
        found = tok.text or "end of input"
        raise self.error(f"expected value or variable, found {found!r}", tok, ("value", "variable"))

    def var_or_property(self) -> Variable | PropertyRef:
        name = self.take_ident("variable").text
        if self.peek().type == ".":
            self.advance()
            prop = self.take_ident("property name").text
            return PropertyRef(variable=name, name=prop)
        return Variable(name=name)

    def literal(self) -> Literal:
        tok = self.peek()
        if tok.type == "STRING":
            self.advance()
            return Literal(value=tok.value)
        if tok.type == "INT":
            self.advance()
            return Literal(value=tok.value)
        if tok.type == "-":
            self.advance()
            num = self.expect("INT", "integer")
            return Literal(value=-int(num.value))  # type: ignore[arg-type]
        if tok.type == "IDENT":
            word = tok.text.upper()
            if word == "TRUE":
                self.advance()
                return Literal(value=True)
            if word == "FALSE":
                self.advance()
                return Literal(value=False)
            if word == "NULL":
                self.advance()
                return Literal(value=None)
        found = tok.text or "end of input"
        raise self.error(f"expected literal, found {found!r}", tok, ("literal",))

    def return_item(self) -> ReturnItem:
        if self.at_keyword("COUNT"):
            self.advance()
            self.expect("(", "'('")
            if self.peek().type == "*":
                self.advance()
                self.expect(")", "')'")
                return ReturnItem(expression=Count(target=None, distinct=False))
            distinct = False
            if self.at_keyword("DISTINCT"):
                self.advance()
                distinct = True
            target = self.var_or_property()
            self.expect(")", "')'")
            return ReturnItem(expression=Count(target=target, distinct=distinct))
        return ReturnItem(expression=self.var_or_property())

    def order_term(self) -> OrderBy:
        if self.at_keyword("COUNT"):
            item = self.return_item()
            expr: Count | Variable | PropertyRef = item.expression  # type: ignore[assignment]
        else:
            expr = self.var_or_property()
        descending = False
        if self.at_keyword("DESC"):
            self.advance()
            descending = True
        elif self.at_keyword("ASC"):
            self.advance()
        return OrderBy(expression=expr, descending=descending)


def _reject_mutations(tokens: list[Token]) -> None:
    for tok in tokens:
        if tok.type == "IDENT" and tok.text.upper() in MUTATION_KEYWORDS:
            raise ForbiddenClause(tok.text.upper(), tok.line, tok.column)


def _validate(query: Query) -> None:
    bound = query.bound_variables()

    def check(expr: object) -> None:
        if isinstance(expr, Variable):
            if expr.name not in bound:
                raise UnboundVariable(expr.name)
        elif isinstance(expr, PropertyRef):
            if expr.variable not in bound:
                raise UnboundVariable(expr.variable)
        elif isinstance(expr, Count) and expr.target is not None:
            check(expr.target)

    for cond in query.where:
        check(cond.left)
        check(cond.right)
    for item in query.return_items:
        check(item.expression)
    for order in query.order_by:
        check(order.expression)

    has_count = any(isinstance(item.expression, Count) for item in query.return_items)
    if has_count and len(query.return_items) > 1:
        raise QuerySyntaxError("count() cannot be combined with other return items", 1, 1)

    if query.order_by:
        returned = {item.expression for item in query.return_items}
        for order in query.order_by:
            if order.expression not in returned:
                raise QuerySyntaxError("ORDER BY expression must appear in RETURN", 1, 1)


def parse_query(text: str) -> Query:
    """Parse ``text`` into a validated :class:`Query`.

    Raises :class:`QuerySyntaxError` on malformed input, :class:`ForbiddenClause`
    when a mutation keyword appears anywhere in the query, and
    :class:`UnboundVariable` when a projection or filter references a variable
    that no pattern binds.
    """
    if not text or not text.strip():
        raise QuerySyntaxError("empty query", 1, 1, ("MATCH",))
    tokens = tokenize(text)
    _reject_mutations(tokens)
    query = _Parser(tokens).parse()
    _validate(query)
    return query
