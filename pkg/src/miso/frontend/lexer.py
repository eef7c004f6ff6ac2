"""Hand-written scanner for MISO source text."""
from __future__ import annotations

from dataclasses import dataclass

from miso.errors import CompileError, Diagnostic

KEYWORDS = frozenset({"cell", "var", "transition", "new", "Int", "Float", "this"})
PUNCT = frozenset("{}():;.")
OPERATORS = frozenset("+-*/=")


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | ident | int | float | punct | operator
    lexeme: str
    line: int
    col: int

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.lexeme!r}, {self.line}:{self.col})"


def tokenize(source: str) -> list[Token]:
    """Split ``source`` into tokens, dropping whitespace and ``//`` comments.

    Raises CompileError with a positioned diagnostic on the first character
    that cannot start a token.
    """
    tokens: list[Token] = []
    i, n = 0, len(source)
    line, line_start = 1, 0

    def emit(kind: str, start: int) -> None:
        tokens.append(Token(kind, source[start:i], line, start - line_start + 1))

    while i < n:
        c = source[i]
        if c == "\n":
            i += 1
            line, line_start = line + 1, i
        elif c.isspace():
            i += 1
        elif source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
        elif c.isascii() and (c.isalpha() or c == "_"):
            start = i
            while i < n and source[i].isascii() and (source[i].isalnum() or source[i] == "_"):
                i += 1
            emit("keyword" if source[start:i] in KEYWORDS else "ident", start)
        elif _is_digit(c) or (c == "." and i + 1 < n and _is_digit(source[i + 1])):
            start = i
            while i < n and _is_digit(source[i]):
                i += 1
            kind = "int"
            if i < n and source[i] == ".":
                kind = "float"
                i += 1
                while i < n and _is_digit(source[i]):
                    i += 1
            emit(kind, start)
        elif c in PUNCT:
            i += 1
            emit("punct", i - 1)
        elif c in OPERATORS:
            i += 1
            emit("operator", i - 1)
        else:
            raise CompileError([Diagnostic(
                "error", f"unexpected character {c!r}", line, i - line_start + 1)])
    return tokens


def _is_digit(c: str) -> bool:
    return "0" <= c <= "9"
