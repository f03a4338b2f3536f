"""Tokenizer for the query subset. Tracks line/column for error reporting."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import QuerySyntaxError

# Token types: IDENT, INT, STRING, EOF, and literal punctuation in PUNCT.
PUNCT = {"(", ")", "{", "}", "[", "]", ":", ",", ".", "=", "<>", "-", "->", "<-", "*"}

_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | set("0123456789")

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "'": "'", "\\": "\\"}


@dataclass(frozen=True)
class Token:
    type: str  # "IDENT" | "INT" | "STRING" | "EOF" | a PUNCT literal
    text: str
    value: object
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line = 1
    col = 1
    n = len(text)

    def error(message: str) -> QuerySyntaxError:
        return QuerySyntaxError(message, line, col)

    while pos < n:
        ch = text[pos]
        if ch == "\n":
            pos += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            pos += 1
            col += 1
            continue
        start_line, start_col = line, col
        if ch in _IDENT_START:
            end = pos + 1
            while end < n and text[end] in _IDENT_CONT:
                end += 1
            word = text[pos:end]
            tokens.append(Token("IDENT", word, word, start_line, start_col))
            col += end - pos
            pos = end
            continue
        if ch.isdigit():
            end = pos + 1
            while end < n and text[end].isdigit():
                end += 1
            word = text[pos:end]
            tokens.append(Token("INT", word, int(word), start_line, start_col))
            col += end - pos
            pos = end
            continue
        if ch in "\"'":
            quote = ch
            end = pos + 1
            chars: list[str] = []
            while True:
                if end >= n:
                    raise error("unterminated string literal")
                c = text[end]
                if c == "\n":
                    raise error("unterminated string literal")
                if c == "\\":
                    if end + 1 >= n:
                        raise error("dangling escape in string literal")
                    esc = text[end + 1]
                    chars.append(_ESCAPES.get(esc, esc))
                    end += 2
                    continue
                if c == quote:
                    end += 1
                    break
                chars.append(c)
                end += 1
            word = text[pos:end]
            tokens.append(Token("STRING", word, "".join(chars), start_line, start_col))
            col += end - pos
            pos = end
            continue
        two = text[pos : pos + 2]
        if two in ("<>", "->", "<-"):
            tokens.append(Token(two, two, two, start_line, start_col))
            pos += 2
            col += 2
            continue
        if ch in "(){}[]:,.=-*":
            tokens.append(Token(ch, ch, ch, start_line, start_col))
            pos += 1
            col += 1
            continue
        raise error(f"unexpected character {ch!r}")
    tokens.append(Token("EOF", "", None, line, col))
    return tokens
