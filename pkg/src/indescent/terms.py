"""Sorted first-order terms, signatures, substitutions and literal constraints."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

BOOL = "Bool"
FRESH_PREFIX = "_v"


class Var:
    """A sorted variable. Immutable, hashable, compared structurally."""

    __slots__ = ("name", "sort", "_hash")

    def __init__(self, name: str, sort: str) -> None:
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "sort", sort)
        object.__setattr__(self, "_hash", hash(("V", name, sort)))

    def __setattr__(self, key, value):
        raise AttributeError("Var is immutable")

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Var)
            and self._hash == other._hash
            and self.name == other.name
            and self.sort == other.sort
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Var({self.name!r}, {self.sort!r})"

    def __str__(self) -> str:
        return self.name

    def __reduce__(self):
        return (Var, (self.name, self.sort))


class App:
    """Application of a function symbol to argument terms."""

    __slots__ = ("fun", "args", "_hash", "_ground")

    def __init__(self, fun: str, args: Iterable["Term"] = ()) -> None:
        args = tuple(args)
        object.__setattr__(self, "fun", fun)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "_hash", hash(("A", fun, args)))
        object.__setattr__(self, "_ground", all(is_ground(a) for a in args))

    def __setattr__(self, key, value):
        raise AttributeError("App is immutable")

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        return (
            isinstance(other, App)
            and self._hash == other._hash
            and self.fun == other.fun
            and self.args == other.args
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"App({self.fun!r}, {self.args!r})"

    def __str__(self) -> str:
        if not self.args:
            return self.fun
        return f"{self.fun}({','.join(str(a) for a in self.args)})"

    def __reduce__(self):
        return (App, (self.fun, self.args))


Term = Union[Var, App]
Substitution = Mapping[Var, Term]


def is_ground(t: Term) -> bool:
    return isinstance(t, App) and t._ground


def term_key(t: Term) -> tuple:
    """Total order on terms used for canonical sorting."""
    if isinstance(t, Var):
        return (0, t.name, t.sort)
    return (1, t.fun, tuple(term_key(a) for a in t.args))


def variables(t: Term) -> Iterator[Var]:
    if isinstance(t, Var):
        yield t
    elif not t._ground:
        for a in t.args:
            yield from variables(a)


def term_vars(t: Term) -> frozenset[Var]:
    return frozenset(variables(t))


def depth(t: Term) -> int:
    """Height of a term; constants and variables have depth 0."""
    if isinstance(t, Var) or not t.args:
        return 0
    return 1 + max(depth(a) for a in t.args)


def size(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + sum(size(a) for a in t.args)


def occurs(v: Var, t: Term) -> bool:
    if isinstance(t, Var):
        return t == v
    if t._ground:
        return False
    return any(occurs(v, a) for a in t.args)


def apply(theta: Substitution, t: Term) -> Term:
    """Simultaneous substitution; variables outside the domain are kept."""
    if isinstance(t, Var):
        return theta.get(t, t)
    if t._ground or not theta:
        return t
    new_args = tuple(apply(theta, a) for a in t.args)
    if all(n is o for n, o in zip(new_args, t.args)):
        return t
    return App(t.fun, new_args)


def compose(first: Substitution, second: Substitution) -> dict[Var, Term]:
    """The substitution t -> apply(second, apply(first, t))."""
    out = {v: apply(second, t) for v, t in first.items()}
    for v, t in second.items():
        out.setdefault(v, t)
    return {v: t for v, t in out.items() if t != v}


def is_flat(theta: Substitution) -> bool:
    return all(isinstance(t, Var) for t in theta.values())


def is_injective(theta: Substitution) -> bool:
    return len(set(theta.values())) == len(theta)


def subst_key(theta: Substitution) -> tuple:
    return tuple(sorted(((term_key(v), term_key(t)) for v, t in theta.items())))


class Subterm(enum.Enum):
    EQUAL = "Equal"
    STRICT = "StrictSubterm"
    NOT = "NotSubterm"


def subterm(u: Term, t: Term) -> Subterm:
    """Is u a subterm of t (syntactically)?"""
    if u == t:
        return Subterm.EQUAL
    stack = list(t.args) if isinstance(t, App) else []
    while stack:
        s = stack.pop()
        if s == u:
            return Subterm.STRICT
        if isinstance(s, App):
            stack.extend(s.args)
    return Subterm.NOT


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)


class SortError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    """Sorts plus function profiles. The boolean sort is always present."""

    sorts: frozenset[str] = frozenset()
    functions: Mapping[str, tuple[tuple[str, ...], str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "sorts", frozenset(self.sorts) | {BOOL})
        funs = {k: (tuple(a), r) for k, (a, r) in self.functions.items()}
        object.__setattr__(self, "functions", funs)
        for name, (arg_sorts, res) in funs.items():
            for s in (*arg_sorts, res):
                if s not in self.sorts:
                    raise SortError(f"function {name} uses undeclared sort {s}")

    def sort_of(self, t: Term) -> str:
        if isinstance(t, Var):
            return t.sort
        return self.functions[t.fun][1]

    def check(self, t: Term) -> str:
        """Return the sort of t, raising SortError on a malformed term."""
        if isinstance(t, Var):
            if t.sort not in self.sorts:
                raise SortError(f"variable {t.name} has undeclared sort {t.sort}")
            return t.sort
        if t.fun not in self.functions:
            raise SortError(f"unknown function symbol {t.fun}")
        arg_sorts, res = self.functions[t.fun]
        if len(arg_sorts) != len(t.args):
            raise SortError(f"{t.fun} expects {len(arg_sorts)} arguments, got {len(t.args)}")
        for expected, a in zip(arg_sorts, t.args):
            got = self.check(a)
            if got != expected:
                raise SortError(f"argument of {t.fun} has sort {got}, expected {expected}")
        return res

    def constructors(self, sort: str) -> list[str]:
        return [f for f, (_, r) in self.functions.items() if r == sort]

    def inhabited_sorts(self) -> frozenset[str]:
        inhabited: set[str] = set()
        changed = True
        while changed:
            changed = False
            for _, (args, res) in self.functions.items():
                if res not in inhabited and all(a in inhabited for a in args):
                    inhabited.add(res)
                    changed = True
        return frozenset(inhabited)

    def infinite_sorts(self) -> frozenset[str]:
        """Sorts whose ground universe is infinite.

        A sort is infinite iff it is inhabited and some function with an
        inhabited profile and an infinite argument sort produces it, where the
        seed is a constructor cycle through inhabited sorts.
        """
        inhabited = self.inhabited_sorts()
        usable = {
            f: (args, res)
            for f, (args, res) in self.functions.items()
            if res in inhabited and all(a in inhabited for a in args)
        }
        infinite: set[str] = set()
        # a sort is infinite iff it can reach (via argument edges) a sort lying on a cycle
        edges: dict[str, set[str]] = {s: set() for s in inhabited}
        for args, res in usable.values():
            edges[res].update(args)
        for s in inhabited:
            seen: set[str] = set()
            stack = list(edges[s])
            on_cycle_reachable = False
            while stack:
                x = stack.pop()
                if x in seen:
                    continue
                seen.add(x)
                if _reaches(edges, x, x):
                    on_cycle_reachable = True
                    break
                stack.extend(edges[x])
            if on_cycle_reachable:
                infinite.add(s)
        return frozenset(infinite)

    def ground_terms(self, sort: str, max_depth: int) -> list[App]:
        """All ground terms of the sort with depth at most max_depth.

        Ordered by depth, then by signature (declaration) order.
        """
        return list(_ground_terms(self, sort, max_depth))

    def ordered_functions(self) -> list[str]:
        return list(self.functions)

    def __hash__(self) -> int:
        return hash((self.sorts, tuple(sorted(self.functions.items()))))


def _reaches(edges: Mapping[str, set[str]], src: str, dst: str) -> bool:
    seen: set[str] = set()
    stack = list(edges[src])
    while stack:
        x = stack.pop()
        if x == dst:
            return True
        if x in seen:
            continue
        seen.add(x)
        stack.extend(edges[x])
    return False


_GROUND_CACHE: dict[tuple, tuple[App, ...]] = {}


def _ground_terms(sig: Signature, sort: str, max_depth: int) -> tuple[App, ...]:
    key = (sig.sorts, tuple(sig.functions.items()), sort, max_depth)
    hit = _GROUND_CACHE.get(key)
    if hit is not None:
        return hit
    # layer d holds terms of exact depth d
    sorts = sorted(sig.sorts)
    layers: dict[str, list[list[App]]] = {s: [] for s in sorts}
    for d in range(max_depth + 1):
        for s in sorts:
            layer: list[App] = []
            for f in sig.constructors(s):
                arg_sorts, _ = sig.functions[f]
                if d == 0:
                    if not arg_sorts:
                        layer.append(App(f, ()))
                    continue
                if not arg_sorts:
                    continue
                pools = [
                    [t for lyr in layers[a][:d] for t in lyr] for a in arg_sorts
                ]
                for combo in itertools.product(*pools):
                    if max(depth(c) for c in combo) == d - 1:
                        layer.append(App(f, combo))
            layers[s].append(layer)
    out = tuple(t for lyr in layers.get(sort, []) for t in lyr)
    if len(_GROUND_CACHE) > 256:
        _GROUND_CACHE.clear()
    _GROUND_CACHE[key] = out
    return out


class FreshNames:
    """Monotone fresh-variable supply with the reserved ``_v`` prefix."""

    def __init__(self, start: int = 0) -> None:
        self.counter = start

    def var(self, sort: str) -> Var:
        v = Var(f"{FRESH_PREFIX}{self.counter}", sort)
        self.counter += 1
        return v

    def rename(self, vs: Iterable[Var]) -> dict[Var, Var]:
        return {v: self.var(v.sort) for v in vs}


def unify(pairs: Iterable[tuple[Term, Term]]) -> dict[Var, Term] | None:
    """Most general unifier with occurs check, idempotent; None if none exists."""
    sigma: dict[Var, Term] = {}
    stack = list(pairs)

    def walk(t: Term) -> Term:
        while isinstance(t, Var) and t in sigma:
            t = sigma[t]
        return t

    def occurs_walk(v: Var, t: Term) -> bool:
        t = walk(t)
        if isinstance(t, Var):
            return t == v
        if t._ground:
            return False
        return any(occurs_walk(v, a) for a in t.args)

    while stack:
        s, t = stack.pop()
        s, t = walk(s), walk(t)
        if s == t:
            continue
        if isinstance(s, Var):
            if occurs_walk(s, t):
                return None
            sigma[s] = t
        elif isinstance(t, Var):
            if occurs_walk(t, s):
                return None
            sigma[t] = s
        else:
            if s.fun != t.fun or len(s.args) != len(t.args):
                return None
            stack.extend(zip(s.args, t.args))

    def resolve(t: Term) -> Term:
        t = walk(t)
        if isinstance(t, Var) or t._ground:
            return t
        return App(t.fun, tuple(resolve(a) for a in t.args))

    return {v: resolve(t) for v, t in sigma.items()}


class Lit:
    """Equality (positive) or disequality literal between same-sort terms."""

    __slots__ = ("positive", "lhs", "rhs", "_hash")

    def __init__(self, positive: bool, lhs: Term, rhs: Term) -> None:
        if term_key(rhs) < term_key(lhs):
            lhs, rhs = rhs, lhs
        object.__setattr__(self, "positive", positive)
        object.__setattr__(self, "lhs", lhs)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "_hash", hash((positive, lhs, rhs)))

    def __setattr__(self, key, value):
        raise AttributeError("Lit is immutable")

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Lit)
            and self.positive == other.positive
            and self.lhs == other.lhs
            and self.rhs == other.rhs
        )

    def __hash__(self) -> int:
        return self._hash

    def key(self) -> tuple:
        return (not self.positive, term_key(self.lhs), term_key(self.rhs))

    def subst(self, theta: Substitution) -> "Lit":
        return Lit(self.positive, apply(theta, self.lhs), apply(theta, self.rhs))

    def vars(self) -> frozenset[Var]:
        return term_vars(self.lhs) | term_vars(self.rhs)

    def __repr__(self) -> str:
        return f"Lit({self.positive}, {self.lhs!r}, {self.rhs!r})"

    def __str__(self) -> str:
        op = "≈" if self.positive else "≉"
        return f"{self.lhs}{op}{self.rhs}"

    def __reduce__(self):
        return (Lit, (self.positive, self.lhs, self.rhs))


def eq(a: Term, b: Term) -> Lit:
    return Lit(True, a, b)


def neq(a: Term, b: Term) -> Lit:
    return Lit(False, a, b)


class LiteralConstraint:
    """A conjunction of literals, kept sorted and duplicate-free.

    The empty conjunction is ⊤.
    """

    __slots__ = ("lits", "_vars", "_hash")

    def __init__(self, lits: Iterable[Lit] = ()) -> None:
        uniq = sorted(set(lits), key=Lit.key)
        object.__setattr__(self, "lits", tuple(uniq))
        object.__setattr__(self, "_vars", None)
        object.__setattr__(self, "_hash", hash(self.lits))

    def __setattr__(self, key, value):
        raise AttributeError("LiteralConstraint is immutable")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LiteralConstraint) and self.lits == other.lits

    def __hash__(self) -> int:
        return self._hash

    @property
    def equalities(self) -> tuple[Lit, ...]:
        return tuple(l for l in self.lits if l.positive)

    @property
    def disequalities(self) -> tuple[Lit, ...]:
        return tuple(l for l in self.lits if not l.positive)

    def vars(self) -> frozenset[Var]:
        if self._vars is None:
            vs: frozenset[Var] = frozenset()
            for l in self.lits:
                vs |= l.vars()
            object.__setattr__(self, "_vars", vs)
        return self._vars

    def subst(self, theta: Substitution) -> "LiteralConstraint":
        if not theta:
            return self
        return LiteralConstraint(l.subst(theta) for l in self.lits)

    def conj(self, other: "LiteralConstraint") -> "LiteralConstraint":
        return LiteralConstraint(self.lits + other.lits)

    def is_top(self) -> bool:
        return not self.lits

    def key(self) -> tuple:
        return tuple(l.key() for l in self.lits)

    def __repr__(self) -> str:
        return f"LiteralConstraint({list(self.lits)!r})"

    def __str__(self) -> str:
        return " ∧ ".join(str(l) for l in self.lits) if self.lits else "⊤"

    def __reduce__(self):
        return (LiteralConstraint, (self.lits,))


TOP = LiteralConstraint()
