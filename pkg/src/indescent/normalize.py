"""Emp-absorption for separation-logic systems.

A predicate whose least solution contains empty heaps splits into a pure
"emp summary" over its arguments and a ``#ne`` variant whose unfoldings
never produce an empty sub-heap at a subgoal.  Entailment p ⊨ q̄ then
reduces to ``p#ne ⊨ q̄#ne`` plus coverage of p's emp summaries by the
summaries of q̄.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .heaps import SymbolicHeap
from .seplog import UnionFind, _partitions, pure_closure
from .system import (
    NE_SUFFIX,
    Atom,
    InductiveSystem,
    Predicate,
    PredicateRule,
    Theory,
    is_universal,
)
from .terms import Lit, Var


@dataclass(frozen=True, order=True)
class EmpSummary:
    """Equality type of the arguments of an empty-heap model.

    ``blocks[i]`` is the smallest position equal to position i; ``diseq``
    holds pairs of block representatives that must differ.
    """

    blocks: tuple[int, ...]
    diseq: frozenset[tuple[int, int]]

    def literals(self, args) -> list[Lit]:
        out = [Lit(True, args[i], args[b]) for i, b in enumerate(self.blocks) if b != i]
        out += [Lit(False, args[i], args[j]) for i, j in sorted(self.diseq)]
        return out

    def holds(self, values) -> bool:
        if any(values[i] != values[b] for i, b in enumerate(self.blocks)):
            return False
        return all(values[i] != values[j] for i, j in self.diseq)

    def __str__(self) -> str:
        eqs = [f"{i + 1}={b + 1}" for i, b in enumerate(self.blocks) if b != i]
        nes = [f"{i + 1}≠{j + 1}" for i, j in sorted(self.diseq)]
        return "emp[" + ", ".join(eqs + nes) + "]"


class NormalizationAbandoned(Exception):
    pass


def _project(uf: UnionFind, lits, goal: tuple[Var, ...]) -> EmpSummary:
    blocks = []
    for i, v in enumerate(goal):
        r = uf.find(v)
        blocks.append(next(j for j in range(i + 1) if uf.find(goal[j]) == r))
    reps = sorted(set(blocks))
    diseq = set()
    for l in lits:
        if l.positive:
            continue
        a, b = uf.find(l.lhs), uf.find(l.rhs)
        ia = [r for r in reps if uf.find(goal[r]) == a]
        ib = [r for r in reps if uf.find(goal[r]) == b]
        if ia and ib:
            diseq.add(tuple(sorted((ia[0], ib[0]))))
    return EmpSummary(tuple(blocks), frozenset(diseq))


def emp_summaries(system: InductiveSystem) -> dict[str, set[EmpSummary]]:
    """Least fixpoint of the empty-heap models, per predicate."""
    E: dict[str, set[EmpSummary]] = {p: set() for p in system.predicates}

    def get(q: str) -> set[EmpSummary]:
        if is_universal(q):
            n = len(system.predicate(q).sorts)
            return {EmpSummary(tuple(range(n)), frozenset())}
        return E[q]

    changed = True
    while changed:
        changed = False
        for p in system.predicates:
            for rule in system.rules_of(p):
                phi: SymbolicHeap = rule.constraint  # type: ignore[assignment]
                if phi.cells or phi.has_true:
                    continue
                pools = [sorted(get(a.pred)) for a in rule.subgoals]
                for combo in itertools.product(*pools):
                    lits = list(phi.pure)
                    for a, s in zip(rule.subgoals, combo):
                        lits += s.literals(a.args)
                    uf, ok = pure_closure(SymbolicHeap(tuple(lits)))
                    if not ok:
                        continue
                    for v in rule.all_vars():
                        uf.add(v)
                    s = _project(uf, lits, rule.goal_vars)
                    if s not in E[p]:
                        E[p].add(s)
                        changed = True
    return E


def ne_name(p: str) -> str:
    return p if is_universal(p) else p + NE_SUFFIX


def _eliminate(rule_goal, kept: list[Atom], phi: SymbolicHeap) -> SymbolicHeap | None:
    """Substitute away variables that are neither goal nor kept-subgoal
    variables; None when a cell still needs one."""
    named = list(rule_goal) + [v for a in kept for v in a.args]
    named_set = set(named)
    uf, ok = pure_closure(phi)
    if not ok:
        return None
    for v in named:
        uf.add(v)
    theta: dict[Var, Var] = {}
    for v in phi.vars():
        if v in named_set:
            continue
        rep = next((w for w in named if uf.find(w) == uf.find(v)), None)
        if rep is not None:
            theta[v] = rep
    out = phi.subst(theta)
    loose = out.vars() - named_set
    if any(c.src in loose or set(c.dsts) & loose for c in out.cells):
        raise NormalizationAbandoned("a cell refers to an absorbed variable")
    pure = []
    for l in out.pure:
        if l.lhs in loose or l.rhs in loose:
            # over an infinite location set these are satisfiable on their own
            continue
        if l.positive and l.lhs == l.rhs:
            continue
        pure.append(l)
    return SymbolicHeap(tuple(pure), out.cells, out.has_true)


@dataclass
class Normalization:
    system: InductiveSystem
    summaries: dict[str, set[EmpSummary]]


def normalize(system: InductiveSystem) -> Normalization | None:
    """The ``#ne`` system, or None when no predicate has an empty model.

    Raises NormalizationAbandoned when absorbing an empty subgoal leaves a
    variable that only a cell mentions.
    """
    if system.theory is not Theory.SEPLOG:
        return None
    E = emp_summaries(system)
    if not any(E.values()):
        return None
    rules: dict[str, list[PredicateRule]] = {}
    for p in system.predicates:
        out: list[PredicateRule] = []
        seen: set = set()
        for rule in system.rules_of(p):
            phi: SymbolicHeap = rule.constraint  # type: ignore[assignment]
            n = len(rule.subgoals)
            for mask in itertools.product((False, True), repeat=n):
                absorbed = [i for i in range(n) if mask[i]]
                if any(not _summ(system, E, rule.subgoals[i].pred) for i in absorbed):
                    continue
                pools = [sorted(_summ(system, E, rule.subgoals[i].pred)) for i in absorbed]
                kept = [
                    Atom(ne_name(a.pred), a.args) for i, a in enumerate(rule.subgoals) if not mask[i]
                ]
                for combo in itertools.product(*pools):
                    lits = list(phi.pure)
                    for i, s in zip(absorbed, combo):
                        lits += s.literals(rule.subgoals[i].args)
                    cand = SymbolicHeap(tuple(lits), phi.cells, phi.has_true)
                    if not cand.cells and not kept and not cand.has_true:
                        continue
                    new_phi = _eliminate(rule.goal_vars, kept, cand)
                    if new_phi is None:
                        continue
                    r = PredicateRule(ne_name(p), rule.goal_vars, new_phi, tuple(kept))
                    k = (str(new_phi), tuple(str(a) for a in kept))
                    if k not in seen:
                        seen.add(k)
                        out.append(r)
        rules[ne_name(p)] = out
    # predicates without non-empty models disappear together with their callers
    changed = True
    while changed:
        changed = False
        dead = {q for q, rs in rules.items() if not rs}
        for q, rs in rules.items():
            keep = [r for r in rs if not any(a.pred in dead for a in r.subgoals)]
            if len(keep) != len(rs):
                rules[q] = keep
                changed = True
    rules = {q: rs for q, rs in rules.items() if rs}
    preds = {
        ne_name(p): Predicate(ne_name(p), pr.sorts)
        for p, pr in system.predicates.items()
        if ne_name(p) in rules
    }
    ne = InductiveSystem(system.theory, system.signature, preds, rules, [], system.width)
    return Normalization(ne, E)


def _summ(system, E, q: str) -> set[EmpSummary]:
    if is_universal(q):
        n = len(system.predicate(q).sorts)
        return {EmpSummary(tuple(range(n)), frozenset())}
    return E[q]


def emp_coverage(E: dict[str, set[EmpSummary]], p: str, qs, arity: int) -> tuple[int, ...] | None:
    """None when every empty model of p is an empty model of some q;
    otherwise an argument tuple (locations) of an uncovered empty model."""
    covers = [s for q in qs for s in E.get(q, ())]
    for s in sorted(E.get(p, ())):
        reps = sorted(set(s.blocks))
        forbidden = {frozenset(d) for d in s.diseq}
        for part in _partitions(reps, forbidden):
            loc = {}
            for i, block in enumerate(part):
                for r in block:
                    loc[r] = i
            values = tuple(loc[s.blocks[i]] for i in range(arity))
            if not any(t.holds(values) for t in covers):
                return values
    return None


__all__ = [
    "EmpSummary",
    "Normalization",
    "NormalizationAbandoned",
    "emp_coverage",
    "emp_summaries",
    "ne_name",
    "normalize",
]
