"""Checks for the four semantic restrictions under which proof search is
complete: non-filtering, ranked, finite variable instantiation (fvi) and
non-overlapping."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .heaps import SymbolicHeap
from .herbrand import (
    Invalid,
    Sat,
    Unknown as HUnknown,
    Valid,
    WitnessMode,
    h_exists_forall,
    h_sat,
    h_witnesses,
    is_tuplewise,
    mgu_of,
)
from .seplog import UnionFind, _partitions, pure_closure, sh_empty_possible, sh_witnesses, sl_non_filtering
from .system import InductiveSystem, PredicateRule, Theory
from .terms import App, LiteralConstraint, Subterm, Var, apply, subterm, term_key, term_vars


@dataclass(frozen=True)
class Pass:
    note: str = ""

    def __str__(self) -> str:
        return "Pass"


@dataclass(frozen=True)
class Fail:
    witness: object
    detail: str

    def __str__(self) -> str:
        return f"Fail: {self.detail}"


@dataclass(frozen=True)
class Unknown:
    reason: str

    def __str__(self) -> str:
        return f"Unknown: {self.reason}"


Verdict = Union[Pass, Fail, Unknown]


@dataclass
class CheckOutcome:
    name: str
    verdict: Verdict
    details: list[tuple[str, Verdict]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": type(self.verdict).__name__,
            "message": str(self.verdict),
            "details": [{"subject": s, "verdict": type(v).__name__, "message": str(v)} for s, v in self.details],
        }


def _merge(name: str, details: list[tuple[str, Verdict]]) -> CheckOutcome:
    for _, v in details:
        if isinstance(v, Fail):
            return CheckOutcome(name, v, details)
    for _, v in details:
        if isinstance(v, Unknown):
            return CheckOutcome(name, v, details)
    return CheckOutcome(name, Pass(), details)


@dataclass
class RestrictionReport:
    non_filtering: CheckOutcome
    ranked: CheckOutcome
    fvi: CheckOutcome
    non_overlapping: CheckOutcome

    def outcomes(self) -> list[CheckOutcome]:
        return [self.non_filtering, self.ranked, self.fvi, self.non_overlapping]

    @property
    def all_pass(self) -> bool:
        return all(isinstance(o.verdict, Pass) for o in self.outcomes())

    @property
    def any_fail(self) -> bool:
        return any(isinstance(o.verdict, Fail) for o in self.outcomes())

    @property
    def claim(self) -> str:
        return "decision procedure" if self.all_pass else "sound semi-decision"

    def render(self) -> str:
        lines = [f"{o.name:16} {o.verdict}" for o in self.outcomes()]
        lines.append(f"search acts as a {self.claim}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "nonFiltering": self.non_filtering.to_dict(),
            "ranked": self.ranked.to_dict(),
            "fvi": self.fvi.to_dict(),
            "nonOverlapping": self.non_overlapping.to_dict(),
            "claim": self.claim,
        }


def check_restrictions(system: InductiveSystem) -> RestrictionReport:
    return RestrictionReport(
        check_non_filtering(system),
        check_ranked(system),
        check_fvi(system),
        check_non_overlapping(system),
    )


def _rules(system: InductiveSystem) -> list[tuple[int, PredicateRule]]:
    return list(enumerate(system.all_rules()))


def _label(i: int, r: PredicateRule) -> str:
    return f"rule {i} ({r})"


# ---------------------------------------------------------------------------
# rule pairs with aligned goal variables


@dataclass(frozen=True)
class RulePair:
    i: int
    j: int
    phi: object
    x_tuples: tuple[tuple[Var, ...], ...]
    psi: object
    y_tuples: tuple[tuple[Var, ...], ...]

    @property
    def label(self) -> str:
        return f"rules ({self.i}, {self.j})"


def rule_pairs(system: InductiveSystem, same_shape: bool = False) -> Iterator[RulePair]:
    """Ordered pairs (φ from rule i, ψ from rule j) over equal goal sorts; ψ's
    goal variables become φ's and its subgoal variables are renamed apart."""
    rules = _rules(system)
    for i, r in rules:
        taken = {v.name for v in r.all_vars()} | {v.name for v in r.constraint.vars()}
        for j, s in rules:
            if [v.sort for v in r.goal_vars] != [v.sort for v in s.goal_vars]:
                continue
            if same_shape and len(r.subgoals) != len(s.subgoals):
                continue
            ren: dict[Var, Var] = dict(zip(s.goal_vars, r.goal_vars))
            for v in (*s.subgoal_vars, *sorted(s.constraint.vars(), key=term_key)):
                if v in ren:
                    continue
                k = 0
                while f"{v.name}'{k}" in taken:
                    k += 1
                name = f"{v.name}'{k}"
                taken.add(name)
                ren[v] = Var(name, v.sort)
            psi = s.constraint.subst(ren)
            y_tuples = tuple(tuple(ren[v] for v in a.args) for a in s.subgoals)
            x_tuples = tuple(tuple(a.args) for a in r.subgoals)
            yield RulePair(i, j, r.constraint, x_tuples, psi, y_tuples)


# ---------------------------------------------------------------------------
# non-filtering


def check_non_filtering(system: InductiveSystem) -> CheckOutcome:
    if system.theory is Theory.SEPLOG:
        res = sl_non_filtering(system)
        if isinstance(res, Valid):
            return CheckOutcome("non-filtering", Pass(res.reason))
        if isinstance(res, Invalid):
            return CheckOutcome("non-filtering", Fail(res.witness, str(res.witness)))
        return CheckOutcome("non-filtering", Unknown(res.reason))
    details: list[tuple[str, Verdict]] = []
    for i, r in _rules(system):
        res = h_exists_forall(r.constraint, r.goal_vars, r.subgoal_vars, system.signature)
        if isinstance(res, Valid):
            v: Verdict = Pass(res.reason)
        elif isinstance(res, Invalid):
            shown = ", ".join(f"{k}={t}" for k, t in sorted(res.witness.items(), key=lambda kv: term_key(kv[0])))
            v = Fail((i, res.witness), f"{_label(i, r)}: no goal values for subgoal values {{{shown}}}")
        else:
            v = Unknown(f"{_label(i, r)}: {res.reason}")
        details.append((_label(i, r), v))
    return _merge("non-filtering", details)


# ---------------------------------------------------------------------------
# ranked


def _ground(t, sig):
    vs = sorted(term_vars(t), key=term_key)
    g = {}
    for v in vs:
        pool = sig.ground_terms(v.sort, 1)
        if not pool:
            return None
        g[v] = pool[0]
    return apply(g, t)


def check_ranked(system: InductiveSystem) -> CheckOutcome:
    details: list[tuple[str, Verdict]] = []
    for i, r in _rules(system):
        if not r.subgoals:
            continue
        if system.theory is Theory.SEPLOG:
            if sh_empty_possible(r.constraint):
                v: Verdict = Fail((i, "emp"), f"{_label(i, r)}: the constraint holds on the empty heap")
            else:
                v = Pass()
            details.append((_label(i, r), v))
            continue
        phi: LiteralConstraint = r.constraint
        mu = mgu_of(phi)
        if mu is None:
            details.append((_label(i, r), Pass("constraint unsatisfiable")))
            continue
        goal_images = [apply(mu, x) for x in r.goal_vars]
        bad = None
        for y in r.subgoal_vars:
            img = apply(mu, y)
            if not any(subterm(img, g) is Subterm.STRICT for g in goal_images):
                bad = y
                break
        if bad is None:
            v = Pass()
        elif phi.disequalities:
            v = Unknown(f"{_label(i, r)}: {bad} is not a strict subterm of a goal value without the disequalities")
        else:
            val = {w: _ground(apply(mu, w), system.signature) for w in (*r.goal_vars, bad)}
            shown = ", ".join(f"{k}={t}" for k, t in val.items())
            v = Fail((i, val), f"{_label(i, r)}: {bad} is not below a goal value ({shown})")
        details.append((_label(i, r), v))
    return _merge("ranked", details)


# ---------------------------------------------------------------------------
# finite variable instantiation


def _sl_tuplewise(theta, phi: SymbolicHeap, x_tuples, y_tuples) -> bool:
    uf, _ = pure_closure(phi)
    targets = {tuple(uf.find(v) for v in t) for t in x_tuples}
    for yi in y_tuples:
        img = tuple(uf.find(theta.get(y, y)) for y in yi)
        if img not in targets:
            return False
    return True


def _show_theta(theta) -> str:
    return "{" + ", ".join(f"{k}↦{t}" for k, t in sorted(theta.items(), key=lambda kv: term_key(kv[0]))) + "}"


def check_fvi(system: InductiveSystem) -> CheckOutcome:
    details: list[tuple[str, Verdict]] = []
    sl = system.theory is Theory.SEPLOG
    for pr in rule_pairs(system, same_shape=sl):
        if sl:
            ws = sh_witnesses(pr.phi, pr.x_tuples, pr.psi, pr.y_tuples, brute_force=True)
            bad = [t for t in ws if not _sl_tuplewise(t, pr.phi, pr.x_tuples, pr.y_tuples)]
        else:
            ws = h_witnesses(pr.phi, pr.x_tuples, pr.psi, pr.y_tuples, system.signature, WitnessMode.SUBTERM_BOUNDED)
            bad = [t for t in ws if not is_tuplewise(t, pr.x_tuples, pr.y_tuples)]
        if bad:
            v: Verdict = Fail((pr.i, pr.j, bad[0]),
                              f"{pr.label}: witness {_show_theta(bad[0])} does not map tuples onto subgoal tuples")
        else:
            v = Pass(f"{len(ws)} witnesses")
        details.append((pr.label, v))
    return _merge("fvi", details)


# ---------------------------------------------------------------------------
# non-overlapping


def sl_conj_sat(phi: SymbolicHeap, psi: SymbolicHeap) -> Optional[dict]:
    """A variable partition under which φ and ψ describe one and the same
    heap, as a map from variables to block indices, or None."""
    uf = UnionFind(phi.vars() | psi.vars())
    for l in (*phi.pure, *psi.pure):
        if l.positive:
            uf.union(l.lhs, l.rhs)
    forbidden: set[frozenset] = set()
    for l in (*phi.pure, *psi.pure):
        if not l.positive:
            a, b = uf.find(l.lhs), uf.find(l.rhs)
            if a == b:
                return None
            forbidden.add(frozenset((a, b)))
    for h in (phi, psi):
        srcs = [uf.find(c.src) for c in h.cells]
        if len(set(srcs)) != len(srcs):
            return None
        for k, a in enumerate(srcs):
            for b in srcs[k + 1:]:
                forbidden.add(frozenset((a, b)))
    roots = sorted({uf.find(v) for v in uf.parent}, key=term_key)
    for part in _partitions(roots, forbidden):
        block = {r: n for n, b in enumerate(part) for r in b}
        cls = {v: block[uf.find(v)] for v in uf.parent}

        def heap(h):
            out = {}
            for c in h.cells:
                out.setdefault(cls[c.src], set()).add(tuple(cls[d] for d in c.dsts))
            return out

        a, b = heap(phi), heap(psi)
        if any(len(s) > 1 for s in (*a.values(), *b.values())):
            continue
        if any(a[k] != b[k] for k in set(a) & set(b)):
            continue
        if (set(a) - set(b) and not psi.has_true) or (set(b) - set(a) and not phi.has_true):
            continue
        return cls
    return None


def check_non_overlapping(system: InductiveSystem) -> CheckOutcome:
    details: list[tuple[str, Verdict]] = []
    sl = system.theory is Theory.SEPLOG
    for pr in rule_pairs(system, same_shape=sl):
        if sl:
            model = sl_conj_sat(pr.phi, pr.psi)
            if model is None:
                details.append((pr.label, Pass("conjunction unsatisfiable")))
                continue
            ws = sh_witnesses(pr.phi, pr.x_tuples, pr.psi, pr.y_tuples, brute_force=True)
        else:
            s = h_sat(pr.phi.conj(pr.psi), system.signature)
            if s is Sat.UNSAT:
                details.append((pr.label, Pass("conjunction unsatisfiable")))
                continue
            if s is not Sat.SAT:
                details.append((pr.label, Unknown(f"{pr.label}: satisfiability over a finite sort")))
                continue
            model = "satisfiable"
            ws = h_witnesses(pr.phi, pr.x_tuples, pr.psi, pr.y_tuples, system.signature, WitnessMode.SUBTERM_BOUNDED)
        if ws:
            details.append((pr.label, Pass(f"{len(ws)} witnesses")))
        else:
            details.append((pr.label, Fail((pr.i, pr.j, model),
                                           f"{pr.label}: {pr.phi} and {pr.psi} overlap but neither entails the other")))
    return _merge("non-overlapping", details)


__all__ = [
    "CheckOutcome",
    "Fail",
    "Pass",
    "RestrictionReport",
    "RulePair",
    "Unknown",
    "check_fvi",
    "check_non_filtering",
    "check_non_overlapping",
    "check_ranked",
    "check_restrictions",
    "rule_pairs",
    "sl_conj_sat",
]
