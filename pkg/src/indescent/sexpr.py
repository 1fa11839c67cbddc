"""A small s-expression reader that keeps source positions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0) -> None:
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Sym:
    text: str
    line: int
    col: int

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class SList:
    items: tuple["SExpr", ...]
    line: int
    col: int

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def __iter__(self):
        return iter(self.items)


SExpr = Union[Sym, SList]


def read_all(text: str) -> list[SExpr]:
    """Parse every top-level s-expression in ``text``."""
    out: list[SExpr] = []
    stack: list[tuple[list[SExpr], int, int]] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c.isspace():
            i, col = i + 1, col + 1
            continue
        if c == "(":
            stack.append(([], line, col))
            i, col = i + 1, col + 1
            continue
        if c == ")":
            if not stack:
                raise ParseError("unbalanced ')'", line, col)
            items, l0, c0 = stack.pop()
            node = SList(tuple(items), l0, c0)
            (stack[-1][0] if stack else out).append(node)
            i, col = i + 1, col + 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in "();":
            j += 1
        sym = Sym(text[i:j], line, col)
        (stack[-1][0] if stack else out).append(sym)
        col += j - i
        i = j
    if stack:
        _, l0, c0 = stack[-1]
        raise ParseError("unclosed '('", l0, c0)
    return out


def render(e: SExpr) -> str:
    if isinstance(e, Sym):
        return e.text
    return "(" + " ".join(render(x) for x in e.items) + ")"
