"""Decision procedures and bounded oracles for Herbrand literal constraints."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Iterator, Mapping, Sequence

from .terms import (
    App,
    LiteralConstraint,
    Lit,
    Signature,
    Term,
    Var,
    apply,
    depth,
    is_ground,
    subterms,
    term_key,
    term_vars,
    unify,
)

if TYPE_CHECKING:
    from .system import InductiveSystem

GroundValuation = dict[Var, App]


class Sat(enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN_FINITE = "UnknownFiniteSort"


class WitnessMode(enum.Enum):
    FLAT_ONLY = "FlatOnly"
    SUBTERM_BOUNDED = "SubtermBounded"


@dataclass(frozen=True)
class WitnessSet:
    members: tuple[dict, ...]
    flat_only: bool

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __bool__(self) -> bool:
        return bool(self.members)


def mgu_of(phi: LiteralConstraint | Iterable[Lit]) -> dict[Var, Term] | None:
    lits = phi.lits if isinstance(phi, LiteralConstraint) else tuple(phi)
    return unify((l.lhs, l.rhs) for l in lits if l.positive)


def h_sat(phi: LiteralConstraint, sig: Signature) -> Sat:
    """Satisfiability of a conjunction of literals in the Herbrand model.

    Disequalities only need an infinite universe for the sorts of variables
    they still mention after the mgu; without disequalities the mgu alone
    decides, provided every variable sort is inhabited.
    """
    mu = mgu_of(phi)
    if mu is None:
        return Sat.UNSAT
    inhabited = sig.inhabited_sorts()
    for v in phi.vars():
        if v.sort not in inhabited:
            return Sat.UNSAT
    open_sorts: set[str] = set()
    for l in phi.disequalities:
        s, t = apply(mu, l.lhs), apply(mu, l.rhs)
        if s == t:
            return Sat.UNSAT
        if unify([(s, t)]) is None:
            continue  # never equal under any grounding
        for v in term_vars(s) | term_vars(t):
            open_sorts.add(v.sort)
    if open_sorts - sig.infinite_sorts():
        # fall back on exhaustive search over the finite universes
        found = h_solve(phi, {}, sig, max_depth=_finite_depth(sig, open_sorts))
        if found is not None:
            return Sat.SAT
        return Sat.UNKNOWN_FINITE
    return Sat.SAT


def _finite_depth(sig: Signature, sorts: Iterable[str]) -> int:
    finite = set(sorts) - sig.infinite_sorts()
    # a finite universe has depth bounded by the number of sorts
    return max(1, len(sig.sorts)) if finite else 0


def h_entails(phi: LiteralConstraint, psi: LiteralConstraint, sig: Signature) -> bool:
    """φ ⊨ ψ for quantifier-free ψ over φ's variables (conservative on finite sorts)."""
    if h_sat(phi, sig) is Sat.UNSAT:
        return True
    mu = mgu_of(phi)
    assert mu is not None
    for l in psi.lits:
        s, t = apply(mu, l.lhs), apply(mu, l.rhs)
        if l.positive:
            if s != t:
                return False
        else:
            if s == t:
                return False
            if unify([(s, t)]) is None:
                continue
            if h_sat(phi.conj(LiteralConstraint([Lit(True, l.lhs, l.rhs)])), sig) is not Sat.UNSAT:
                return False
    return True


def _witness_key(theta: Mapping[Var, Term], mu: Mapping[Var, Term]) -> frozenset:
    return frozenset((v, apply(mu, t)) for v, t in theta.items())


def h_witnesses(
    phi: LiteralConstraint,
    x_tuples: Sequence[Sequence[Var]],
    psi: LiteralConstraint,
    y_tuples: Sequence[Sequence[Var]],
    sig: Signature,
    mode: WitnessMode = WitnessMode.FLAT_ONLY,
) -> WitnessSet:
    """Substitutions θ over the existential variables of ψ with φ ⊨ ψθ.

    FlatOnly maps every existential tuple ȳᵢ onto a whole subgoal tuple x̄ⱼ
    of φ (same sorts). SubtermBounded maps each existential variable to any
    subterm of φ's terms after mgu normalisation. Results are deduplicated
    modulo φ's equalities and returned in lexicographic order.
    """
    y_tuples = [tuple(t) for t in y_tuples]
    mu = mgu_of(phi) or {}
    out: list[dict] = []
    seen: set[frozenset] = set()
    if mode is WitnessMode.FLAT_ONLY:
        for choice in itertools.product(range(len(x_tuples)), repeat=len(y_tuples)):
            theta: dict[Var, Term] = {}
            ok = True
            for yi, j in zip(y_tuples, choice):
                xj = tuple(x_tuples[j])
                if len(xj) != len(yi) or any(a.sort != b.sort for a, b in zip(xj, yi)):
                    ok = False
                    break
                theta.update(zip(yi, xj))
            if not ok:
                continue
            if not y_tuples:
                theta = {}
            if h_entails(phi, psi.subst(theta), sig):
                k = _witness_key(theta, mu)
                if k not in seen:
                    seen.add(k)
                    out.append(theta)
        return WitnessSet(tuple(out), True)
    ys = [y for t in y_tuples for y in t]
    pool: dict[str, list[Term]] = {}
    cand: list[Term] = []
    base_terms = [l.lhs for l in phi.lits] + [l.rhs for l in phi.lits]
    base_terms += list(phi.vars()) + [v for t in x_tuples for v in t]
    for t in base_terms:
        for s in subterms(apply(mu, t)):
            cand.append(s)
        cand.append(t)
    uniq = sorted(set(cand), key=term_key)
    for t in uniq:
        pool.setdefault(sig.sort_of(t), []).append(t)
    for images in itertools.product(*(pool.get(y.sort, []) for y in ys)):
        theta = dict(zip(ys, images))
        if h_entails(phi, psi.subst(theta), sig):
            k = _witness_key(theta, mu)
            if k not in seen:
                seen.add(k)
                out.append(theta)
    return WitnessSet(tuple(out), False)


def witness_keys(ws: WitnessSet, phi: LiteralConstraint) -> set[frozenset]:
    mu = mgu_of(phi) or {}
    return {_witness_key(t, mu) for t in ws}


def is_tuplewise(theta: Mapping[Var, Term], x_tuples, y_tuples) -> bool:
    """Every existential tuple is mapped onto one whole subgoal tuple."""
    targets = {tuple(t) for t in x_tuples}
    for yi in y_tuples:
        img = tuple(theta.get(y, y) for y in yi)
        if img not in targets:
            return False
    return True


# ---------------------------------------------------------------------------
# ∀ subgoal ∃ goal check


@dataclass(frozen=True)
class Valid:
    reason: str = ""


@dataclass(frozen=True)
class Invalid:
    witness: dict


@dataclass(frozen=True)
class Unknown:
    reason: str


DEFAULT_EF_DEPTH = 3
DEFAULT_EF_CAP = 20000


def _pattern_decision(
    phi: LiteralConstraint, goal: set[Var], sig: Signature
) -> Valid | Invalid | Unknown | None:
    """Exact decision for the definitional pattern; None if the pattern does not apply."""
    defs: dict[Var, Term] = {}
    rest: list[Lit] = []
    for l in phi.lits:
        if l.positive:
            for a, b in ((l.lhs, l.rhs), (l.rhs, l.lhs)):
                if isinstance(a, Var) and a in goal and not (term_vars(b) & goal):
                    if a in defs:
                        return None
                    defs[a] = b
                    break
            else:
                return None
        else:
            rest.append(l)
    for l in rest:
        s, t = apply(defs, l.lhs), apply(defs, l.rhs)
        if (term_vars(s) | term_vars(t)) & goal:
            return Unknown("disequality mentions an undefined goal variable")
        mu = unify([(s, t)])
        if mu is not None:
            grounding = _ground_default(
                {v for v in term_vars(s) | term_vars(t)}, mu, sig
            )
            if grounding is None:
                return Unknown("cannot ground a colliding valuation")
            return Invalid(grounding)
    return Valid("definitional pattern")


def _ground_default(vs: set[Var], mu: Mapping[Var, Term], sig: Signature) -> dict | None:
    out: dict[Var, App] = {}
    free: dict[Var, App] = {}
    for v in sorted(vs, key=term_key):
        t = apply(mu, v)
        for w in term_vars(t):
            if w not in free:
                cands = sig.ground_terms(w.sort, 0) or sig.ground_terms(w.sort, 3)
                if not cands:
                    return None
                free[w] = cands[0]
        out[v] = apply(free, t)
    return out


def h_exists_forall(
    phi: LiteralConstraint,
    goal_vars: Sequence[Var],
    subgoal_vars: Sequence[Var],
    sig: Signature,
    depth: int = DEFAULT_EF_DEPTH,
    cap: int = DEFAULT_EF_CAP,
) -> Valid | Invalid | Unknown:
    """Check ∀subgoal ∃goal. φ (the non-filtering sufficient condition)."""
    goal = set(goal_vars)
    universal = [v for v in subgoal_vars if v in phi.vars()]
    if not universal:
        s = h_sat(phi, sig)
        if s is Sat.SAT:
            return Valid("no universally quantified variable")
        if s is Sat.UNSAT:
            return Invalid({})
        return Unknown("finite sort")
    decided = _pattern_decision(phi, goal, sig)
    if isinstance(decided, (Valid, Invalid)):
        return decided
    pools = [sig.ground_terms(v.sort, depth) for v in universal]
    inconclusive = False
    for count, values in enumerate(itertools.product(*pools)):
        if count >= cap:
            inconclusive = True
            break
        grounding = dict(zip(universal, values))
        s = h_sat(phi.subst(grounding), sig)
        if s is Sat.UNSAT:
            return Invalid(grounding)
        if s is Sat.UNKNOWN_FINITE:
            inconclusive = True
    finite = sig.sorts - sig.infinite_sorts()
    exhausted = all(
        v.sort in finite and len(sig.ground_terms(v.sort, depth + 1)) == len(pools[i])
        for i, v in enumerate(universal)
    )
    if exhausted and not inconclusive:
        return Valid("finite universe exhausted")
    if decided is not None:
        return decided
    return Unknown(f"no counterexample up to depth {depth}; the definitional pattern does not apply")


# ---------------------------------------------------------------------------
# models


def h_solve(
    phi: LiteralConstraint,
    fixed: Mapping[Var, App],
    sig: Signature,
    max_depth: int = 3,
    order: Sequence[Var] | None = None,
) -> GroundValuation | None:
    """A ground valuation extending ``fixed`` that satisfies φ, searching
    free variables over terms of bounded depth."""
    lits = list(phi.lits) + [Lit(True, v, t) for v, t in fixed.items()]
    mu = unify((l.lhs, l.rhs) for l in lits if l.positive)
    if mu is None:
        return None
    vs = set(phi.vars()) | set(fixed)
    images = {v: apply(mu, v) for v in vs}
    free = sorted({w for t in images.values() for w in term_vars(t)}, key=term_key)
    if order is not None:
        rank = {v: i for i, v in enumerate(order)}
        free.sort(key=lambda v: (rank.get(v, len(rank)), term_key(v)))
    diseqs = [l for l in phi.lits if not l.positive]
    pools = [sig.ground_terms(w.sort, max_depth) for w in free]
    for values in itertools.product(*pools):
        g = dict(zip(free, values))
        val = {v: apply(g, t) for v, t in images.items()}
        if all(apply(val, l.lhs) != apply(val, l.rhs) for l in diseqs):
            return val  # type: ignore[return-value]
    return None


def h_satisfies(val: Mapping[Var, Term], phi: LiteralConstraint) -> bool:
    for l in phi.lits:
        s, t = apply(val, l.lhs), apply(val, l.rhs)
        if not (is_ground(s) and is_ground(t)):
            return False
        if (s == t) != l.positive:
            return False
    return True


def h_groundings(phi: LiteralConstraint, sig: Signature, max_depth: int) -> Iterator[dict]:
    """All valuations of φ's variables over terms of depth ≤ max_depth satisfying φ."""
    vs = sorted(phi.vars(), key=term_key)
    for values in itertools.product(*(sig.ground_terms(v.sort, max_depth) for v in vs)):
        val = dict(zip(vs, values))
        if h_satisfies(val, phi):
            yield val


# ---------------------------------------------------------------------------
# least-solution oracle


def h_enumerate(system: "InductiveSystem", p: str, max_depth: int = 4) -> set[tuple]:
    """Tuples of μS(p) whose terms all have depth ≤ max_depth (Kleene iteration)."""
    return h_least_solution(system, max_depth)[p]


def h_least_solution(system: "InductiveSystem", max_depth: int = 4) -> dict[str, set[tuple]]:
    sig = system.signature
    sol: dict[str, set[tuple]] = {p: set() for p in system.predicates}
    changed = True
    while changed:
        changed = False
        for p in system.predicates:
            for r in system.rules_of(p):
                for tup in _fire(system, r, sol, max_depth):
                    if tup not in sol[p]:
                        sol[p].add(tup)
                        changed = True
    return sol


def _fire(system, rule, sol, max_depth: int) -> Iterator[tuple]:
    sig = system.signature
    pools = []
    for a in rule.subgoals:
        if a.pred in sol:
            pools.append(sorted(sol[a.pred], key=lambda t: tuple(term_key(x) for x in t)))
        else:  # universal predicate
            pools.append(
                list(itertools.product(*(sig.ground_terms(v.sort, max_depth) for v in a.args)))
            )
    for combo in itertools.product(*pools):
        fixed: dict[Var, App] = {}
        for a, vals in zip(rule.subgoals, combo):
            fixed.update(zip(a.args, vals))
        phi = rule.constraint
        lits = list(phi.lits) + [Lit(True, v, t) for v, t in fixed.items()]
        mu = unify((l.lhs, l.rhs) for l in lits if l.positive)
        if mu is None:
            continue
        goal_imgs = [apply(mu, v) for v in rule.goal_vars]
        free = sorted(
            {w for t in goal_imgs for w in term_vars(t)}
            | {w for l in phi.lits for w in term_vars(apply(mu, l.lhs)) | term_vars(apply(mu, l.rhs))},
            key=term_key,
        )
        diseqs = [l for l in phi.lits if not l.positive]
        for values in itertools.product(*(sig.ground_terms(w.sort, max_depth) for w in free)):
            g = dict(zip(free, values))
            val = {v: apply(g, apply(mu, v)) for v in phi.vars() | set(rule.goal_vars)}
            if any(apply(val, l.lhs) == apply(val, l.rhs) for l in diseqs):
                continue
            tup = tuple(val[v] for v in rule.goal_vars)
            if all(depth(t) <= max_depth for t in tup):
                yield tup


def h_member(system: "InductiveSystem", p: str, tup: Sequence[App], max_depth: int | None = None) -> bool:
    """Membership of a ground tuple in μS(p) by top-down rule matching.

    Subgoal values fixed by unification are checked recursively; values left
    open by a rule range over ground terms of depth ≤ max_depth (default:
    the tuple's depth). Exact for ranked systems.
    """
    bound = max([depth(t) for t in tup] + [0]) if max_depth is None else max_depth
    return _TopDown(system, bound).member(p, tuple(tup))


class _TopDown:
    def __init__(self, system: "InductiveSystem", bound: int) -> None:
        self.system = system
        self.bound = bound
        self.memo: dict[tuple, bool] = {}
        self.active: set[tuple] = set()

    def member(self, p: str, tup: tuple) -> bool:
        from .system import is_universal

        if is_universal(p):
            return True
        key = (p, tup)
        if key in self.memo:
            return self.memo[key]
        if key in self.active:
            return False
        self.active.add(key)
        try:
            ok = any(self._rule(r, tup) for r in self.system.rules_of(p))
        finally:
            self.active.discard(key)
        self.memo[key] = ok
        return ok

    def _rule(self, rule, tup: tuple) -> bool:
        phi = rule.constraint
        lits = list(phi.lits) + [Lit(True, v, t) for v, t in zip(rule.goal_vars, tup)]
        mu = unify((l.lhs, l.rhs) for l in lits if l.positive)
        if mu is None:
            return False
        vs = set(rule.all_vars()) | set(phi.vars())
        images = {v: apply(mu, v) for v in vs}
        free = sorted({w for t in images.values() for w in term_vars(t)}, key=term_key)
        sig = self.system.signature
        diseqs = [l for l in phi.lits if not l.positive]
        for values in itertools.product(*(sig.ground_terms(w.sort, self.bound) for w in free)):
            g = dict(zip(free, values))
            val = {v: apply(g, t) for v, t in images.items()}
            if any(apply(val, l.lhs) == apply(val, l.rhs) for l in diseqs):
                continue
            if all(self.member(a.pred, tuple(val[v] for v in a.args)) for a in rule.subgoals):
                return True
        return False


def h_small_members(system: "InductiveSystem", max_rounds: int = 64) -> dict[str, tuple]:
    """One member of shallow depth for every non-empty predicate."""
    from .system import is_universal

    sig = system.signature
    best: dict[str, tuple] = {}

    def get(q: str, sorts) -> tuple | None:
        if is_universal(q):
            pools = [sig.ground_terms(s, 2) for s in sorts]
            if all(pools):
                return tuple(pl[0] for pl in pools)
            return None
        return best.get(q)

    for _ in range(max_rounds):
        changed = False
        for p in system.predicates:
            for rule in system.rules_of(p):
                fixed: dict[Var, App] = {}
                ok = True
                for a in rule.subgoals:
                    t = get(a.pred, [v.sort for v in a.args])
                    if t is None:
                        ok = False
                        break
                    fixed.update(zip(a.args, t))
                if not ok:
                    continue
                val = h_solve(rule.constraint, fixed, sig, max_depth=2, order=rule.goal_vars)
                if val is None:
                    continue
                tup = tuple(val.get(v) for v in rule.goal_vars)
                if any(t is None for t in tup):
                    tup = tuple(
                        val[v] if v in val else sig.ground_terms(v.sort, 1)[0] for v in rule.goal_vars
                    )
                d = max([depth(t) for t in tup] + [0])
                cur = best.get(p)
                if cur is None or d < max([depth(t) for t in cur] + [0]):
                    best[p] = tup
                    changed = True
        if not changed:
            break
    return best


_LS_CACHE: dict[tuple[int, int], tuple["InductiveSystem", dict[str, set[tuple]]]] = {}


def h_least_solution_cached(system: "InductiveSystem", max_depth: int) -> dict[str, set[tuple]]:
    key = (id(system), max_depth)
    hit = _LS_CACHE.get(key)
    if hit is None or hit[0] is not system:
        if len(_LS_CACHE) > 64:
            _LS_CACHE.clear()
        hit = (system, h_least_solution(system, max_depth))
        _LS_CACHE[key] = hit
    return hit[1]
