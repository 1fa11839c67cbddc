"""Top-down tree automata: conversion to inductive systems, membership,
downward antichain inclusion, random generation and a bounded brute-force
inclusion check."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .parser import ParseError
from .system import Atom, EntailmentQuery, InductiveSystem, Predicate, PredicateRule, Theory, validate_system
from .terms import App, LiteralConstraint, Lit, Signature, Var, depth

SORT = "T"


@dataclass(frozen=True)
class Transition:
    state: str
    symbol: str
    children: tuple[str, ...] = ()

    def __str__(self) -> str:
        kids = ",".join(self.children)
        return f"{self.state} →{self.symbol} ({kids})"


@dataclass
class NFTA:
    states: tuple[str, ...]
    alphabet: dict[str, int]
    transitions: tuple[Transition, ...]
    _by_state: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.states = tuple(self.states)
        self.transitions = tuple(self.transitions)
        for t in self.transitions:
            if t.symbol not in self.alphabet:
                raise ValueError(f"transition {t} uses unknown symbol {t.symbol}")
            if self.alphabet[t.symbol] != len(t.children):
                raise ValueError(f"transition {t} does not match the rank of {t.symbol}")
            for q in (t.state, *t.children):
                if q not in self.states:
                    raise ValueError(f"transition {t} uses unknown state {q}")
        for q in self.states:
            self._by_state[q] = tuple(t for t in self.transitions if t.state == q)

    def of(self, q: str) -> tuple[Transition, ...]:
        return self._by_state[q]

    def to_text(self, queries: Iterable[tuple[str, Sequence[str]]] = ()) -> str:
        lines = [" ".join((t.state, t.symbol, *t.children)) for t in self.transitions]
        lines += [f"entails {p} {' '.join(qs)}" for p, qs in queries]
        return "\n".join(lines) + "\n"


def parse_nfta(text: str) -> tuple[NFTA, list[tuple[str, tuple[str, ...]]]]:
    """``state symbol child…`` per line, ``entails p q…`` for queries, ``#`` comments."""
    trans: list[tuple[str, str, tuple[str, ...]]] = []
    queries: list[tuple[str, tuple[str, ...]]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "entails":
            if len(parts) < 3:
                raise ParseError(f"line {lineno}: entails needs a state and at least one state")
            queries.append((parts[1], tuple(parts[2:])))
            continue
        if len(parts) < 2:
            raise ParseError(f"line {lineno}: expected 'state symbol child…'")
        trans.append((parts[0], parts[1], tuple(parts[2:])))
    alphabet: dict[str, int] = {}
    states: list[str] = []
    for q, f, kids in trans:
        if alphabet.setdefault(f, len(kids)) != len(kids):
            raise ParseError(f"symbol {f} used with ranks {alphabet[f]} and {len(kids)}")
        for s in (q, *kids):
            if s not in states:
                states.append(s)
    for p, qs in queries:
        for s in (p, *qs):
            if s not in states:
                raise ParseError(f"query mentions unknown state {s}")
    try:
        a = NFTA(tuple(states), alphabet, tuple(Transition(*t) for t in trans))
    except ValueError as e:
        raise ParseError(str(e)) from None
    return a, queries


def nfta_to_system(a: NFTA, queries: Iterable[tuple[str, Sequence[str]]] = ()) -> InductiveSystem:
    """``q →f (q₁…qₙ)`` becomes ``q(x) ← x ≈ f(x₁…xₙ), q₁(x₁), …, qₙ(xₙ)``."""
    for q in a.states:
        if not a.of(q):
            raise ValueError(f"state {q} has no transition and cannot be the goal of a rule")
    sig = Signature(frozenset({SORT}), {f: ((SORT,) * n, SORT) for f, n in a.alphabet.items()})
    x = Var("x", SORT)
    rules: dict[str, list[PredicateRule]] = {q: [] for q in a.states}
    for t in a.transitions:
        xs = tuple(Var(f"x{i + 1}", SORT) for i in range(len(t.children)))
        phi = LiteralConstraint([Lit(True, x, App(t.symbol, xs))])
        subs = tuple(Atom(c, (v,)) for c, v in zip(t.children, xs))
        rules[t.state].append(PredicateRule(t.state, (x,), phi, subs))
    preds = {q: Predicate(q, (SORT,)) for q in a.states}
    qs = [EntailmentQuery(p, tuple(r)) for p, r in queries]
    system = InductiveSystem(Theory.HERBRAND, sig, preds, rules, qs)
    validate_system(system)
    return system


def system_to_nfta(system: InductiveSystem) -> NFTA:
    """Inverse of :func:`nfta_to_system` for automata-shaped systems."""
    if system.theory is not Theory.HERBRAND:
        raise ValueError("only Herbrand systems can be automata")
    trans: list[Transition] = []
    for p, pred in system.predicates.items():
        if pred.arity != 1:
            raise ValueError(f"{p} is not unary")
        for r in system.rules_of(p):
            lits = r.constraint.lits
            if len(lits) != 1 or not lits[0].positive:
                raise ValueError(f"rule {r} is not a single equality")
            l = lits[0]
            x = r.goal_vars[0]
            term = l.rhs if l.lhs == x else l.lhs if l.rhs == x else None
            if not isinstance(term, App) or not all(isinstance(v, Var) for v in term.args):
                raise ValueError(f"rule {r} does not define x by a flat term")
            kids = term.args
            if len(set(kids)) != len(kids) or x in kids:
                raise ValueError(f"rule {r} repeats a variable")
            by_var = {a.args[0]: a.pred for a in r.subgoals if len(a.args) == 1}
            if len(r.subgoals) != len(kids) or set(by_var) != set(kids):
                raise ValueError(f"rule {r} does not constrain every child exactly once")
            trans.append(Transition(p, term.fun, tuple(by_var[v] for v in kids)))
    alphabet = {f: len(args) for f, (args, _) in system.signature.functions.items()}
    return NFTA(tuple(system.predicates), alphabet, tuple(trans))


# ---------------------------------------------------------------------------
# membership


class Membership:
    def __init__(self, a: NFTA) -> None:
        self.a = a
        self.memo: dict[tuple[str, App], bool] = {}

    def accepts(self, q: str, t: App) -> bool:
        key = (q, t)
        hit = self.memo.get(key)
        if hit is None:
            hit = any(
                tr.symbol == t.fun and all(self.accepts(c, s) for c, s in zip(tr.children, t.args))
                for tr in self.a.of(q)
            )
            self.memo[key] = hit
        return hit


def membership(a: NFTA, q: str, t: App) -> bool:
    return Membership(a).accepts(q, t)


# ---------------------------------------------------------------------------
# downward antichain inclusion


@dataclass
class InclusionResult:
    included: bool
    witness: Optional[App] = None
    explored: list[tuple[str, frozenset[str]]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.included


def productive_witnesses(a: NFTA) -> dict[str, App]:
    """A smallest-depth accepted term per productive state."""
    best: dict[str, App] = {}
    changed = True
    while changed:
        changed = False
        for t in a.transitions:
            if all(c in best for c in t.children):
                term = App(t.symbol, tuple(best[c] for c in t.children))
                cur = best.get(t.state)
                if cur is None or depth(term) < depth(cur):
                    best[t.state] = term
                    changed = True
    return best


class _Inclusion:
    def __init__(self, a: NFTA, prune: bool) -> None:
        self.a = a
        self.prune = prune
        self.small = productive_witnesses(a)
        self.true: list[tuple[str, frozenset]] = []
        # results that leaned on the stack pair at index low; settled when it pops
        self.pending: list[tuple[tuple[str, frozenset], int]] = []
        self.false: dict[tuple[str, frozenset], App] = {}
        self.stack: list[tuple[str, frozenset]] = []
        self.explored: list[tuple[str, frozenset]] = []

    def check(self, p: str, S: frozenset) -> tuple[Optional[App], int]:
        """(counterexample or None, lowest stack index assumed)."""
        key = (p, S)
        if p in S:
            return None, len(self.stack)
        if key in self.false:
            return self.false[key], len(self.stack)
        if self.prune:
            for (r, bigger), w in self.false.items():
                if r == p and S <= bigger:
                    return w, len(self.stack)
            for r, smaller in self.true:
                if r == p and smaller <= S:
                    return None, len(self.stack)
            for (r, smaller), lo in self.pending:
                if r == p and smaller <= S:
                    return None, lo
        else:
            if key in self.true:
                return None, len(self.stack)
            for k, lo in self.pending:
                if k == key:
                    return None, lo
        for i, (r, T) in enumerate(self.stack):
            if r == p and (T <= S if self.prune else T == S):
                return None, i
        if p not in self.small:
            return None, len(self.stack)  # empty language
        self.explored.append(key)
        self.stack.append(key)
        mark = len(self.pending)
        here = len(self.stack) - 1
        low = len(self.stack)
        cex = None
        for tr in self.a.of(p):
            if any(c not in self.small for c in tr.children):
                continue
            targets = [u.children for s in sorted(S) for u in self.a.of(s) if u.symbol == tr.symbol]
            targets = list(dict.fromkeys(targets))
            n = len(tr.children)
            if n == 0:
                if not targets:
                    cex = App(tr.symbol)
                    break
                continue
            for choice in itertools.product(range(n), repeat=len(targets)):
                parts: list[App] = []
                for i in range(n):
                    Si = frozenset(t[i] for t, c in zip(targets, choice) if c == i)
                    w, lo = self.check(tr.children[i], Si)
                    low = min(low, lo)
                    if w is None:
                        break
                    parts.append(w)
                else:
                    cex = App(tr.symbol, tuple(parts))
                    break
            if cex is not None:
                break
        self.stack.pop()
        if cex is not None:
            del self.pending[mark:]
            self.false[key] = cex
            return cex, len(self.stack)
        if low >= here:
            self.true.extend(k for k, _ in self.pending[mark:])
            del self.pending[mark:]
            self.true.append(key)
            return None, len(self.stack)
        self.pending[mark:] = [(k, low) for k, _ in self.pending[mark:]]
        self.pending.append((key, low))
        return None, low


def antichain_inclusion(a: NFTA, p: str, qs: Iterable[str], prune: bool = True) -> InclusionResult:
    """Decide L(p) ⊆ ⋃ L(q) by top-down exploration of (state, state-set) pairs
    with transition and split moves; a counterexample term is rebuilt on failure."""
    inc = _Inclusion(a, prune)
    w, _ = inc.check(p, frozenset(qs))
    return InclusionResult(w is None, w, inc.explored)


# ---------------------------------------------------------------------------
# bounded brute force


def run_sets(a: NFTA, max_depth: int = 4) -> dict[frozenset[str], App]:
    """Every set {q : t ∈ L(q)} realised by a ground term of depth ≤ max_depth,
    with one smallest such term."""
    found: dict[frozenset[str], App] = {}
    ranks = sorted(a.alphabet.items())
    for _ in range(max_depth + 1):
        known = list(found.items())
        new: dict[frozenset[str], App] = {}
        for f, n in ranks:
            for combo in itertools.product(known, repeat=n):
                sets = [c[0] for c in combo]
                R = frozenset(
                    t.state for t in a.transitions
                    if t.symbol == f and all(c in s for c, s in zip(t.children, sets))
                )
                if R not in found and R not in new:
                    new[R] = App(f, tuple(c[1] for c in combo))
        if not new:
            break
        found.update(new)
    return found


def brute_force_inclusion(a: NFTA, p: str, qs: Iterable[str], max_depth: int = 4) -> InclusionResult:
    qs = set(qs)
    cands = [(depth(t), str(t), t) for R, t in run_sets(a, max_depth).items() if p in R and not (R & qs)]
    if not cands:
        return InclusionResult(True)
    return InclusionResult(False, min(cands)[2])


# ---------------------------------------------------------------------------
# random instances


def trim(a: NFTA, root: Optional[str] = None) -> NFTA:
    """Drop unproductive states and, given a root, states it cannot reach."""
    productive = set(productive_witnesses(a))
    keep = [t for t in a.transitions if t.state in productive and all(c in productive for c in t.children)]
    alive = productive
    if root is not None:
        alive = {root} if root in productive else set()
        todo = list(alive)
        while todo:
            q = todo.pop()
            for t in keep:
                if t.state == q:
                    for c in t.children:
                        if c not in alive:
                            alive.add(c)
                            todo.append(c)
        keep = [t for t in keep if t.state in alive]
    states = tuple(q for q in a.states if q in alive)
    return NFTA(states, dict(a.alphabet), tuple(keep))


def random_nfta(seed: int, max_states: int = 5, max_rank: int = 2, max_symbols: int = 4) -> NFTA:
    """Reproducible random automaton, trimmed so that every state is productive
    and reachable from ``q0``; always has a constant symbol. Draws that trim
    down to one state are rejected unless ``max_states`` is 1."""
    if min(max_states, max_symbols) < 1 or max_rank < 0:
        raise ValueError("bounds must be positive")
    rng = random.Random(seed)
    while True:
        nsym = rng.randint(1, max_symbols)
        names = "abcdefgh"[:nsym] if nsym <= 8 else [f"s{i}" for i in range(nsym)]
        alphabet = {names[0]: 0}
        for f in names[1:]:
            alphabet[f] = rng.randint(0, max_rank)
        states = tuple(f"q{i}" for i in range(rng.randint(1, max_states)))
        trans: list[Transition] = []
        for q in states:
            for _ in range(rng.randint(1, 3)):
                f = rng.choice(list(alphabet))
                kids = tuple(rng.choice(states) for _ in range(alphabet[f]))
                trans.append(Transition(q, f, kids))
        trans = list(dict.fromkeys(trans))
        a = trim(NFTA(states, alphabet, tuple(trans)), root="q0")
        if len(a.states) >= min(2, max_states):
            return a


@dataclass(frozen=True)
class InclusionInstance:
    seed: int
    automaton: NFTA
    lhs: str
    rhs: tuple[str, ...]


def random_instance(seed: int, max_states: int = 5, max_rank: int = 2, max_symbols: int = 4) -> InclusionInstance:
    a = random_nfta(seed, max_states, max_rank, max_symbols)
    rng = random.Random(f"query-{seed}")
    p = rng.choice(a.states)
    pool = [q for q in a.states if q != p] or [p]
    k = rng.randint(1, min(3, len(pool)))
    qs = tuple(sorted(rng.sample(pool, k)))
    return InclusionInstance(seed, a, p, qs)
