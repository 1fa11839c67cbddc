"""Inductive systems: predicates, rules, universal predicates and queries."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .heaps import LOC, EMP, SymbolicHeap
from .terms import (
    FRESH_PREFIX,
    TOP,
    LiteralConstraint,
    Signature,
    SortError,
    Var,
    term_key,
)

Constraint = Union[LiteralConstraint, SymbolicHeap]
UNIV_PREFIX = "univ#"
NE_SUFFIX = "#ne"


class Theory(enum.Enum):
    HERBRAND = "herbrand"
    SEPLOG = "seplog"


class ValidationError(ValueError):
    pass


class UnknownPredicate(KeyError):
    pass


@dataclass(frozen=True)
class Predicate:
    name: str
    sorts: tuple[str, ...]

    @property
    def arity(self) -> int:
        return len(self.sorts)


class Atom:
    """Predicate atom ``p(x̄)`` over variables."""

    __slots__ = ("pred", "args", "_hash")

    def __init__(self, pred: str, args: Iterable[Var]) -> None:
        object.__setattr__(self, "pred", pred)
        object.__setattr__(self, "args", tuple(args))
        object.__setattr__(self, "_hash", hash(("atom", pred, self.args)))

    def __setattr__(self, key, value):
        raise AttributeError("Atom is immutable")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Atom) and self.pred == other.pred and self.args == other.args

    def __hash__(self) -> int:
        return self._hash

    def key(self) -> tuple:
        return (self.pred, tuple(term_key(a) for a in self.args))

    def subst(self, theta) -> "Atom":
        return Atom(self.pred, tuple(theta.get(a, a) for a in self.args))

    def __repr__(self) -> str:
        return f"Atom({self.pred!r}, {self.args!r})"

    def __str__(self) -> str:
        return f"{self.pred}({','.join(str(a) for a in self.args)})"

    def __reduce__(self):
        return (Atom, (self.pred, self.args))


@dataclass(frozen=True)
class PredicateRule:
    """``p(x̄) ← constraint, q₁(x̄₁), …, qₙ(x̄ₙ)``."""

    pred: str
    goal_vars: tuple[Var, ...]
    constraint: Constraint
    subgoals: tuple[Atom, ...] = ()

    @property
    def goal(self) -> Atom:
        return Atom(self.pred, self.goal_vars)

    @property
    def subgoal_vars(self) -> tuple[Var, ...]:
        return tuple(v for a in self.subgoals for v in a.args)

    def all_vars(self) -> tuple[Var, ...]:
        return self.goal_vars + self.subgoal_vars

    def instantiate(self, args: Sequence[Var], renaming: dict[Var, Var]):
        """Constraint and subgoals with goal vars mapped to ``args`` and
        subgoal vars renamed by ``renaming``."""
        theta = dict(zip(self.goal_vars, args))
        theta.update(renaming)
        return self.constraint.subst(theta), tuple(a.subst(theta) for a in self.subgoals)

    def __str__(self) -> str:
        body = [str(self.constraint)] + [str(a) for a in self.subgoals]
        return f"{self.goal} ← {', '.join(body)}"


@dataclass(frozen=True)
class EntailmentQuery:
    lhs: str
    rhs: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.lhs} ⊨ {', '.join(self.rhs)}"


def is_universal(name: str) -> bool:
    return name.startswith(UNIV_PREFIX)


def universal_name(sorts: Sequence[str]) -> str:
    return UNIV_PREFIX + ":".join(sorts) if sorts else UNIV_PREFIX


def universal_sorts(name: str) -> tuple[str, ...]:
    body = name[len(UNIV_PREFIX):]
    return tuple(body.split(":")) if body else ()


def universal_rule(
    k: int,
    sorts: Sequence[str] | None = None,
    theory: Theory = Theory.HERBRAND,
) -> PredicateRule:
    """The single rule of the universal predicate of arity k.

    Herbrand: constraint ⊤. Separation logic: ``emp`` so that padding a
    conjunction with it preserves the heap semantics.
    """
    if k < 0:
        raise ValueError("arity must be non-negative")
    if sorts is None:
        sorts = (LOC if theory is Theory.SEPLOG else "U",) * k
    sorts = tuple(sorts)
    if len(sorts) != k:
        raise ValueError("sort list does not match arity")
    xs = tuple(Var(f"x{i + 1}", s) for i, s in enumerate(sorts))
    constraint = EMP if theory is Theory.SEPLOG else TOP
    return PredicateRule(universal_name(sorts), xs, constraint, ())


@dataclass
class InductiveSystem:
    theory: Theory
    signature: Signature
    predicates: dict[str, Predicate]
    rules: dict[str, list[PredicateRule]]
    queries: list[EntailmentQuery] = field(default_factory=list)
    width: int = 1

    def rules_of(self, p: str) -> list[PredicateRule]:
        if is_universal(p):
            sorts = universal_sorts(p)
            return [universal_rule(len(sorts), sorts, self.theory)]
        if p not in self.rules:
            raise UnknownPredicate(p)
        return self.rules[p]

    def predicate(self, p: str) -> Predicate:
        if is_universal(p):
            return Predicate(p, universal_sorts(p))
        if p not in self.predicates:
            raise UnknownPredicate(p)
        return self.predicates[p]

    def all_rules(self) -> list[PredicateRule]:
        return [r for p in self.predicates for r in self.rules.get(p, [])]

    def sorts_of(self, p: str) -> tuple[str, ...]:
        return self.predicate(p).sorts

    def validate(self) -> "InductiveSystem":
        validate_system(self)
        return self


def _check_user_name(kind: str, name: str) -> None:
    if "#" in name:
        raise ValidationError(f"{kind} name {name!r} contains reserved character '#'")


def validate_rule(system: InductiveSystem, rule: PredicateRule) -> None:
    sig = system.signature
    if rule.pred not in system.predicates:
        raise ValidationError(f"rule for undeclared predicate {rule.pred}")
    atoms = (rule.goal,) + rule.subgoals
    for a in atoms:
        if a.pred not in system.predicates and not is_universal(a.pred):
            raise ValidationError(f"atom {a} uses undeclared predicate {a.pred}")
        target = system.predicate(a.pred)
        if len(a.args) != target.arity:
            raise ValidationError(f"atom {a} has arity {len(a.args)}, expected {target.arity}")
        for v, s in zip(a.args, target.sorts):
            if v.sort != s:
                raise ValidationError(f"argument {v} of {a} has sort {v.sort}, expected {s}")
    names = [v for a in atoms for v in a.args]
    if len(set(names)) != len(names):
        raise ValidationError(
            f"rule {rule}: goal and subgoal variables must be pairwise distinct"
        )
    clashing = {v.name for v in names}
    if len(clashing) != len(names):
        raise ValidationError(f"rule {rule}: one variable name used with two sorts")
    for v in names:
        if v.name.startswith(FRESH_PREFIX):
            raise ValidationError(f"variable name {v.name} uses the reserved prefix")
    cvars = rule.constraint.vars()
    extra = cvars - set(names)
    if extra:
        raise ValidationError(
            f"rule {rule}: constraint variables {sorted(v.name for v in extra)} "
            "are neither goal nor subgoal variables"
        )
    if system.theory is Theory.HERBRAND:
        if not isinstance(rule.constraint, LiteralConstraint):
            raise ValidationError("herbrand rules need literal constraints")
        for lit in rule.constraint.lits:
            try:
                s1, s2 = sig.check(lit.lhs), sig.check(lit.rhs)
            except SortError as e:
                raise ValidationError(str(e)) from e
            if s1 != s2:
                raise ValidationError(f"literal {lit} compares sorts {s1} and {s2}")
    else:
        if not isinstance(rule.constraint, SymbolicHeap):
            raise ValidationError("seplog rules need symbolic-heap constraints")
        for v in set(names) | cvars:
            if v.sort != LOC:
                raise ValidationError(f"seplog variable {v} must have sort {LOC}")
        for c in rule.constraint.cells:
            if len(c.dsts) != system.width:
                raise ValidationError(
                    f"points-to {c} has {len(c.dsts)} targets, record width is {system.width}"
                )


def validate_system(system: InductiveSystem, user_names: bool = True) -> None:
    if user_names:
        for p in system.predicates:
            _check_user_name("predicate", p)
        for f in system.signature.functions:
            _check_user_name("function", f)
    for p, pred in system.predicates.items():
        for s in pred.sorts:
            if s not in system.signature.sorts:
                raise ValidationError(f"predicate {p} uses undeclared sort {s}")
        rs = system.rules.get(p, [])
        if not rs:
            raise ValidationError(f"predicate {p} is not the goal of any rule")
        goal = rs[0].goal_vars
        for r in rs:
            if r.pred != p:
                raise ValidationError(f"rule {r} filed under {p}")
            if r.goal_vars != goal:
                raise ValidationError(
                    f"rules of {p} must share the goal variables "
                    f"({', '.join(map(str, goal))}), got ({', '.join(map(str, r.goal_vars))})"
                )
            validate_rule(system, r)
    for p in system.rules:
        if p not in system.predicates:
            raise ValidationError(f"rules given for undeclared predicate {p}")
    for q in system.queries:
        validate_query(system, q)


def validate_query(system: InductiveSystem, q: EntailmentQuery) -> None:
    for name in (q.lhs, *q.rhs):
        if name not in system.predicates:
            raise ValidationError(f"query uses undeclared predicate {name}")
    lhs = system.predicates[q.lhs].sorts
    for name in q.rhs:
        if system.predicates[name].sorts != lhs:
            raise ValidationError(f"query predicates {q.lhs} and {name} differ in argument sorts")
