"""Proof strategies: regular expressions over rule labels, compiled to a DFA."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

LABELS = ("LU", "RU", "RD", "AR", "SP", "AX", "ID")
_ALIASES = {"∧R": "AR", "ANDR": "AR", "RU_SL": "RU", "RD_SL": "RD", "SP_SL": "SP", "AX_SL": "AX"}

DEFAULT_STRATEGY = "(LU RU* RD AR* SP?)* LU? RU* (AX | ID)"


class StrategyError(ValueError):
    pass


_TOKEN = re.compile(r"\s*(∧R|[A-Za-z_]+|[()|*?+·.])")


def _tokenize(text: str) -> list[str]:
    out, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise StrategyError(f"unexpected character at {pos}: {text[pos]!r}")
        tok = m.group(1)
        pos = m.end()
        if tok in "·.":
            continue
        up = tok.upper()
        up = _ALIASES.get(up, _ALIASES.get(tok, up))
        if tok not in "()|*?+" and up not in LABELS:
            raise StrategyError(f"unknown rule label {tok!r}")
        out.append(up if tok not in "()|*?+" else tok)
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


# AST: ("sym", label) | ("eps",) | ("cat", a, b) | ("alt", a, b) | ("star", a)


class _Parser:
    def __init__(self, toks: list[str]) -> None:
        self.toks = toks
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self) -> str:
        t = self.toks[self.i]
        self.i += 1
        return t

    def parse(self):
        node = self.alt()
        if self.peek() is not None:
            raise StrategyError(f"unexpected {self.peek()!r}")
        return node

    def alt(self):
        node = self.cat()
        while self.peek() == "|":
            self.take()
            node = ("alt", node, self.cat())
        return node

    def cat(self):
        parts = []
        while self.peek() not in (None, "|", ")"):
            parts.append(self.post())
        if not parts:
            return ("eps",)
        node = parts[0]
        for p in parts[1:]:
            node = ("cat", node, p)
        return node

    def post(self):
        node = self.atom()
        while self.peek() in ("*", "?", "+"):
            op = self.take()
            if op == "*":
                node = ("star", node)
            elif op == "?":
                node = ("alt", node, ("eps",))
            else:
                node = ("cat", node, ("star", node))
        return node

    def atom(self):
        t = self.peek()
        if t is None:
            raise StrategyError("unexpected end of strategy")
        if t == "(":
            self.take()
            node = self.alt()
            if self.peek() != ")":
                raise StrategyError("missing ')'")
            self.take()
            return node
        if t in LABELS:
            self.take()
            return ("sym", t)
        raise StrategyError(f"unexpected {t!r}")


@dataclass
class _NFA:
    eps: dict[int, set[int]] = field(default_factory=dict)
    trans: dict[int, dict[str, set[int]]] = field(default_factory=dict)
    count: int = 0

    def new(self) -> int:
        self.count += 1
        return self.count - 1

    def add_eps(self, a: int, b: int) -> None:
        self.eps.setdefault(a, set()).add(b)

    def add(self, a: int, sym: str, b: int) -> None:
        self.trans.setdefault(a, {}).setdefault(sym, set()).add(b)

    def build(self, node) -> tuple[int, int]:
        kind = node[0]
        s, f = self.new(), self.new()
        if kind == "eps":
            self.add_eps(s, f)
        elif kind == "sym":
            self.add(s, node[1], f)
        elif kind == "cat":
            s1, f1 = self.build(node[1])
            s2, f2 = self.build(node[2])
            self.add_eps(s, s1)
            self.add_eps(f1, s2)
            self.add_eps(f2, f)
        elif kind == "alt":
            for sub in node[1:]:
                s1, f1 = self.build(sub)
                self.add_eps(s, s1)
                self.add_eps(f1, f)
        elif kind == "star":
            s1, f1 = self.build(node[1])
            self.add_eps(s, s1)
            self.add_eps(s, f)
            self.add_eps(f1, s1)
            self.add_eps(f1, f)
        return s, f

    def closure(self, states: Iterable[int]) -> frozenset[int]:
        seen = set(states)
        stack = list(seen)
        while stack:
            q = stack.pop()
            for r in self.eps.get(q, ()):
                if r not in seen:
                    seen.add(r)
                    stack.append(r)
        return frozenset(seen)


class Strategy:
    """Deterministic automaton for a strategy regex over rule labels."""

    def __init__(self, text: str = DEFAULT_STRATEGY) -> None:
        self.text = text
        ast = _Parser(_tokenize(text)).parse()
        nfa = _NFA()
        start, final = nfa.build(ast)
        init = nfa.closure([start])
        index = {init: 0}
        todo = [init]
        self.delta: dict[tuple[int, str], int] = {}
        self.accepting: set[int] = set()
        while todo:
            S = todo.pop()
            sid = index[S]
            if final in S:
                self.accepting.add(sid)
            for lab in LABELS:
                nxt = set()
                for q in S:
                    nxt |= nfa.trans.get(q, {}).get(lab, set())
                if not nxt:
                    continue
                T = nfa.closure(nxt)
                if T not in index:
                    index[T] = len(index)
                    todo.append(T)
                self.delta[(sid, lab)] = index[T]
        self.nstates = len(index)
        # states from which an accepting state is reachable
        live = set(self.accepting)
        changed = True
        while changed:
            changed = False
            for (a, _), b in self.delta.items():
                if b in live and a not in live:
                    live.add(a)
                    changed = True
        self.live = live
        self.start = 0

    def step(self, state: int, label: str) -> int | None:
        nxt = self.delta.get((state, label))
        if nxt is None or nxt not in self.live:
            return None
        return nxt

    def allows(self, state: int, label: str) -> bool:
        return self.step(state, label) is not None

    def allows_final(self, state: int, label: str) -> bool:
        nxt = self.step(state, label)
        return nxt is not None and nxt in self.accepting

    def run(self, labels: Sequence[str]) -> int | None:
        state: int | None = self.start
        for lab in labels:
            if state is None:
                return None
            state = self.step(state, lab)
        return state

    def accepts(self, labels: Sequence[str]) -> bool:
        st = self.run(labels)
        return st is not None and st in self.accepting

    def is_prefix(self, labels: Sequence[str]) -> bool:
        return self.run(labels) is not None

    def __repr__(self) -> str:
        return f"Strategy({self.text!r})"
