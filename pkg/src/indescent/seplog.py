"""Symbolic-heap reasoning: satisfiability, precise entailment, witnesses,
the allocation/equality abstraction, and concrete model oracles."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Iterator, Mapping, Sequence

from .heaps import EMP, Heap, PointsTo, SymbolicHeap
from .herbrand import Invalid, Sat, Unknown, Valid, WitnessSet
from .terms import Lit, Var, term_key

if TYPE_CHECKING:
    from .system import InductiveSystem, PredicateRule


class UnionFind:
    def __init__(self, items: Iterable = ()) -> None:
        self.parent: dict = {}
        for x in items:
            self.add(x)

    def add(self, x) -> None:
        self.parent.setdefault(x, x)

    def find(self, x):
        self.add(x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # deterministic representative: the smaller key wins
            if _key(rb) < _key(ra):
                ra, rb = rb, ra
            self.parent[rb] = ra

    def classes(self) -> dict:
        out: dict = {}
        for x in list(self.parent):
            out.setdefault(self.find(x), []).append(x)
        return out


def _key(x):
    return term_key(x) if isinstance(x, Var) else (2, x)


def pure_closure(phi: SymbolicHeap, extra: Iterable[Lit] = ()) -> tuple[UnionFind, bool]:
    """Union-find over the equalities; the flag says the pure part is consistent."""
    uf = UnionFind(phi.vars())
    lits = list(phi.pure) + list(extra)
    for l in lits:
        if l.positive:
            uf.union(l.lhs, l.rhs)
    for l in lits:
        if not l.positive and uf.find(l.lhs) == uf.find(l.rhs):
            return uf, False
    return uf, True


def sh_sat(phi: SymbolicHeap, extra: Iterable[Lit] = ()) -> Sat:
    uf, ok = pure_closure(phi, extra)
    if not ok:
        return Sat.UNSAT
    srcs = [uf.find(c.src) for c in phi.cells]
    if len(set(srcs)) != len(srcs):
        return Sat.UNSAT
    return Sat.SAT


def sh_empty_possible(phi: SymbolicHeap) -> bool:
    """Can φ hold on the empty heap?"""
    return not phi.cells and pure_closure(phi)[1]


def _cell_key(uf: UnionFind, c: PointsTo) -> tuple:
    return (_key(uf.find(c.src)), tuple(_key(uf.find(d)) for d in c.dsts))


def sh_entails(phi: SymbolicHeap, psi: SymbolicHeap, theta: Mapping[Var, Var] | None = None) -> bool:
    """Precise entailment φ ⊨ ψθ between predicate-free symbolic heaps."""
    if sh_sat(phi) is Sat.UNSAT:
        return True
    target = psi.subst(theta or {})
    uf, _ = pure_closure(phi)
    for v in target.vars():
        uf.add(v)
    for l in target.pure:
        same = uf.find(l.lhs) == uf.find(l.rhs)
        if l.positive and not same:
            return False
        if not l.positive:
            if same:
                return False
            if sh_sat(phi, [Lit(True, l.lhs, l.rhs)]) is not Sat.UNSAT:
                return False
    mine = sorted(_cell_key(uf, c) for c in phi.cells)
    theirs = sorted(_cell_key(uf, c) for c in target.cells)
    if phi.has_true and not target.has_true:
        return False
    if target.has_true:
        pool = list(mine)
        for c in theirs:
            if c not in pool:
                return False
            pool.remove(c)
        return True
    return mine == theirs


def sh_witnesses(
    phi: SymbolicHeap,
    x_tuples: Sequence[Sequence[Var]],
    psi: SymbolicHeap,
    y_tuples: Sequence[Sequence[Var]],
    brute_force: bool = False,
) -> WitnessSet:
    """Substitutions θ of ψ's existential variables with φ ⊨ ψθ.

    The default mode maps existential tuples onto whole subgoal tuples of φ.
    ``brute_force`` tries every map into φ's variables (the oracle mode).
    Members are deduplicated modulo φ's equalities.
    """
    y_tuples = [tuple(t) for t in y_tuples]
    uf, _ = pure_closure(phi)
    out: list[dict] = []
    seen: set = set()

    def record(theta: dict) -> None:
        if sh_entails(phi, psi, theta):
            k = frozenset((y, uf.find(v)) for y, v in theta.items())
            if k not in seen:
                seen.add(k)
                out.append(theta)

    if not brute_force:
        for choice in itertools.product(range(len(x_tuples)), repeat=len(y_tuples)):
            theta: dict[Var, Var] = {}
            ok = True
            for yi, j in zip(y_tuples, choice):
                xj = tuple(x_tuples[j])
                if len(xj) != len(yi):
                    ok = False
                    break
                theta.update(zip(yi, xj))
            if ok:
                record(theta)
        return WitnessSet(tuple(out), True)
    ys = [y for t in y_tuples for y in t]
    pool = sorted(set(phi.vars()) | {v for t in x_tuples for v in t}, key=term_key)
    for images in itertools.product(pool, repeat=len(ys)):
        record(dict(zip(ys, images)))
    return WitnessSet(tuple(out), False)


# ---------------------------------------------------------------------------
# concrete models


def sh_eval(phi: SymbolicHeap, val: Mapping[Var, int], heap: Heap) -> bool:
    """ν, h ⊨ φ for a predicate-free symbolic heap."""
    for l in phi.pure:
        if (val[l.lhs] == val[l.rhs]) != l.positive:
            return False
    cells: dict[int, tuple] = {}
    for c in phi.cells:
        s = val[c.src]
        if s in cells:
            return False
        cells[s] = tuple(val[d] for d in c.dsts)
    if phi.has_true:
        return all(heap.get(s) == t for s, t in cells.items())
    return dict(heap) == cells


def sh_models(phi: SymbolicHeap, nlocs: int, extra_vars: Iterable[Var] = ()) -> Iterator[tuple[dict, Heap]]:
    """All (valuation, heap) models over locations 0..nlocs-1 (no ``true`` part)."""
    vs = sorted(set(phi.vars()) | set(extra_vars), key=term_key)
    for values in itertools.product(range(nlocs), repeat=len(vs)):
        val = dict(zip(vs, values))
        cells: dict[int, tuple] = {}
        ok = True
        for c in phi.cells:
            s = val[c.src]
            if s in cells:
                ok = False
                break
            cells[s] = tuple(val[d] for d in c.dsts)
        if not ok:
            continue
        if all((val[l.lhs] == val[l.rhs]) == l.positive for l in phi.pure):
            yield val, Heap(cells)


def sh_entails_oracle(phi: SymbolicHeap, psi: SymbolicHeap, theta: Mapping[Var, Var] | None = None,
                      nlocs: int = 4) -> bool:
    """Small-model check of φ ⊨ ψθ over heaps with ≤ nlocs locations."""
    target = psi.subst(theta or {})
    for val, heap in sh_models(phi, nlocs, target.vars()):
        if not sh_eval(target, val, heap):
            return False
    return True


def sh_sat_oracle(phi: SymbolicHeap, nlocs: int | None = None) -> bool:
    n = max(1, len(phi.vars())) if nlocs is None else nlocs
    return next(sh_models(phi, n), None) is not None


# ---------------------------------------------------------------------------
# unfolding trees and least-solution oracles


@dataclass(frozen=True)
class UnfoldingTree:
    """Which rule produced which sub-heap; children follow the rule's subgoals."""

    pred: str
    args: tuple[int, ...]
    rule_index: int
    heap: Heap
    children: tuple["UnfoldingTree", ...] = ()

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)

    def nodes(self) -> Iterator["UnfoldingTree"]:
        yield self
        for c in self.children:
            yield from c.nodes()

    def total_heap(self) -> Heap:
        out: dict[int, tuple] = {}
        for n in self.nodes():
            for l, t in n.heap.items():
                if l in out:
                    raise ValueError("unfolding tree nodes overlap")
                out[l] = t
        return Heap(out)

    def rename(self, m: Mapping[int, int]) -> "UnfoldingTree":
        return UnfoldingTree(
            self.pred,
            tuple(m.get(a, a) for a in self.args),
            self.rule_index,
            self.heap.rename(m),
            tuple(c.rename(m) for c in self.children),
        )

    def __str__(self) -> str:
        inner = "".join(" " + str(c) for c in self.children)
        return f"({self.pred}#{self.rule_index}{list(self.args)} {self.heap}{inner})"


class SLMembership:
    """Memoised membership in the least solution for concrete heaps."""

    def __init__(self, system: "InductiveSystem") -> None:
        self.system = system
        self.memo: dict[tuple, UnfoldingTree | None] = {}
        self.active: set[tuple] = set()

    def member(self, p: str, args: Sequence[int], heap: Heap) -> UnfoldingTree | None:
        """Smallest unfolding tree showing (args, heap) ∈ μS(p), or None."""
        key = (p, tuple(args), heap)
        if key in self.memo:
            return self.memo[key]
        if key in self.active:
            return None
        self.active.add(key)
        best: UnfoldingTree | None = None
        try:
            for idx, rule in enumerate(self.system.rules_of(p)):
                for tree in self._via_rule(idx, rule, tuple(args), heap):
                    if best is None or tree.size() < best.size():
                        best = tree
        finally:
            self.active.discard(key)
        self.memo[key] = best
        return best

    def _via_rule(self, idx: int, rule: "PredicateRule", args: tuple, heap: Heap):
        phi: SymbolicHeap = rule.constraint  # type: ignore[assignment]
        val: dict[Var, int] = dict(zip(rule.goal_vars, args))
        uf, ok = pure_closure(phi)
        if not ok:
            return
        for v in rule.all_vars():
            uf.add(v)
        classes = uf.classes()
        fixed: dict = {}
        for v, a in val.items():
            r = uf.find(v)
            if fixed.get(r, a) != a:
                return
            fixed[r] = a
        open_roots = sorted((r for r in classes if r not in fixed), key=_key)
        locs = sorted(heap.locations() | set(args))
        fresh_base = max(locs, default=-1) + 1
        cands = locs + [fresh_base + i for i in range(len(open_roots))]
        for values in itertools.product(cands, repeat=len(open_roots)):
            assign = dict(fixed)
            assign.update(zip(open_roots, values))
            full = {v: assign[uf.find(v)] for v in rule.all_vars()}
            if not all(full[l.lhs] != full[l.rhs] for l in phi.pure if not l.positive):
                continue
            own: dict[int, tuple] = {}
            good = True
            for c in phi.cells:
                s, t = full[c.src], tuple(full[d] for d in c.dsts)
                if s in own or heap.get(s) != t:
                    good = False
                    break
                own[s] = t
            if not good:
                continue
            rest = [l for l in heap if l not in own]
            subs = rule.subgoals
            if not subs:
                if rest and not phi.has_true:
                    continue
                yield UnfoldingTree(rule.pred, args, idx, Heap(own))
                continue
            slots = len(subs) + (1 if phi.has_true else 0)
            for owners in itertools.product(range(slots), repeat=len(rest)):
                parts: list[dict[int, tuple]] = [{} for _ in range(slots)]
                for l, o in zip(rest, owners):
                    parts[o][l] = heap[l]
                kids = []
                for a, part in zip(subs, parts):
                    t = self.member(a.pred, tuple(full[v] for v in a.args), Heap(part))
                    if t is None:
                        break
                    kids.append(t)
                else:
                    extra = parts[-1] if phi.has_true else {}
                    yield UnfoldingTree(rule.pred, args, idx, Heap({**own, **extra}), tuple(kids))


def sl_member(system: "InductiveSystem", p: str, args: Sequence[int], heap: Heap) -> UnfoldingTree | None:
    return SLMembership(system).member(p, args, heap)


def canonical_model(args: Sequence[int], heap: Heap) -> tuple[dict[int, int], tuple, Heap]:
    """Rename locations by first occurrence: arguments, then a BFS through
    the heap, then any remaining cells (best effort)."""
    order: dict[int, int] = {}

    def visit(l: int) -> None:
        if l not in order:
            order[l] = len(order)

    for a in args:
        visit(a)
    queue = list(args)
    while queue:
        l = queue.pop(0)
        if l in heap:
            for t in heap[l]:
                if t not in order:
                    visit(t)
                    queue.append(t)
    for l in sorted(heap):
        if l not in order:
            visit(l)
            queue = [l]
            while queue:
                x = queue.pop(0)
                if x in heap:
                    for t in heap[x]:
                        if t not in order:
                            visit(t)
                            queue.append(t)
    for l in sorted(heap.locations()):
        visit(l)
    return order, tuple(order[a] for a in args), heap.rename(order)


def _symbolic_unfoldings(system, p: str, args: tuple[Var, ...], budget: int, fresh: list[int]):
    """Yield (formula, tree-skeleton) for unfoldings of p(args) with ≤ budget rules."""
    if budget <= 0:
        return
    for idx, rule in enumerate(system.rules_of(p)):
        ren: dict[Var, Var] = dict(zip(rule.goal_vars, args))
        for v in rule.subgoal_vars:
            fresh[0] += 1
            ren[v] = Var(f"_u{fresh[0]}", v.sort)
        phi = rule.constraint.subst(ren)
        subs = [a.subst(ren) for a in rule.subgoals]
        yield from _combine(system, p, idx, args, phi, subs, budget - 1, fresh)


def _combine(system, p, idx, args, phi, subs, budget, fresh):
    if not subs:
        yield phi, (p, args, idx, phi, ())
        return
    first, rest = subs[0], subs[1:]
    min_rest = len(rest)
    for f_phi, f_tree in _symbolic_unfoldings(system, first.pred, first.args, budget - min_rest, fresh):
        used = _skeleton_size(f_tree)
        for r_phi, r_tree in _combine(system, p, idx, args, phi, rest, budget - used, fresh):
            yield f_phi.conj(r_phi), (p, args, idx, phi, (f_tree,) + r_tree[4])


def _skeleton_size(t) -> int:
    return 1 + sum(_skeleton_size(c) for c in t[4])


def _partitions(items: list, uf_diseq: set[frozenset]) -> Iterator[list[list]]:
    """Set partitions of ``items`` avoiding blocks containing a forbidden pair."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _partitions(rest, uf_diseq):
        yield [[first]] + part
        for i, block in enumerate(part):
            if any(frozenset((first, b)) in uf_diseq for b in block):
                continue
            yield part[:i] + [[first] + block] + part[i + 1:]


def sh_enumerate(
    system: "InductiveSystem",
    p: str,
    max_locations: int | None = None,
    max_unfold: int = 3,
) -> set[tuple[tuple, Heap, UnfoldingTree]]:
    """Models of p from unfolding trees with at most ``max_unfold`` rule
    applications, over every aliasing of the tree's variables, canonically
    renamed and restricted to ≤ max_locations locations."""
    from .system import Predicate  # noqa: F401  (import cycle guard)

    pred = system.predicate(p)
    args = tuple(Var(f"_a{i}", s) for i, s in enumerate(pred.sorts))
    out: dict[tuple, tuple[tuple, Heap, UnfoldingTree]] = {}
    fresh = [0]
    for phi, skel in _symbolic_unfoldings(system, p, args, max_unfold, fresh):
        uf, ok = pure_closure(phi)
        if not ok:
            continue
        for v in args:
            uf.add(v)
        roots = sorted(uf.classes(), key=_key)
        forbidden = {
            frozenset((uf.find(l.lhs), uf.find(l.rhs))) for l in phi.pure if not l.positive
        }
        srcs = [uf.find(c.src) for c in phi.cells]
        for i, a in enumerate(srcs):
            for b in srcs[i + 1:]:
                forbidden.add(frozenset((a, b)))
        if any(len(f) == 1 for f in forbidden):
            continue
        for part in _partitions(roots, forbidden):
            if max_locations is not None and len(part) > max_locations:
                continue
            loc_of = {}
            for i, block in enumerate(sorted(part, key=lambda b: min(_key(x) for x in b))):
                for r in block:
                    loc_of[r] = i
            val = {v: loc_of[uf.find(v)] for v in uf.parent}
            tree = _concretize(skel, val)
            heap = tree.total_heap()
            tup = tuple(val[a] for a in args)
            order, ctup, cheap = canonical_model(tup, heap)
            key = (ctup, cheap)
            if key not in out or tree.size() < out[key][2].size():
                out[key] = (ctup, cheap, tree.rename(order))
    return set(out.values())


def _concretize(skel, val) -> UnfoldingTree:
    p, args, idx, phi, kids = skel
    own = {val[c.src]: tuple(val[d] for d in c.dsts) for c in phi.cells}
    return UnfoldingTree(p, tuple(val[a] for a in args), idx, Heap(own),
                         tuple(_concretize(k, val) for k in kids))


# ---------------------------------------------------------------------------
# allocation / equality abstraction


@dataclass(frozen=True, order=True)
class AbstractPair:
    """Allocated argument positions and the equality relation on positions
    (1-based, pairs i < j)."""

    alloc: frozenset[int]
    eq: frozenset[tuple[int, int]]

    def __str__(self) -> str:
        a = "{" + ",".join(map(str, sorted(self.alloc))) + "}"
        e = "{" + ",".join(f"({i},{j})" for i, j in sorted(self.eq)) + "}"
        return f"({a}, {e})"


def pair_of_model(args: Sequence[int], heap: Heap) -> AbstractPair:
    alloc = frozenset(i + 1 for i, a in enumerate(args) if a in heap)
    eq = frozenset(
        (i + 1, j + 1) for i in range(len(args)) for j in range(i + 1, len(args)) if args[i] == args[j]
    )
    return AbstractPair(alloc, eq)


def _equivalences(n: int) -> Iterator[frozenset[tuple[int, int]]]:
    for part in _partitions(list(range(1, n + 1)), set()):
        yield frozenset(
            (i, j) for block in part for i in block for j in block if i < j
        )


def all_pairs(n: int) -> set[AbstractPair]:
    out = set()
    for e in _equivalences(n):
        for k in range(n + 1):
            for a in itertools.combinations(range(1, n + 1), k):
                pa = frozenset(a)
                # equal positions agree on allocation
                if all((i in pa) == (j in pa) for i, j in e):
                    out.add(AbstractPair(pa, e))
    return out


@dataclass
class _RuleView:
    rule: "PredicateRule"
    phi: SymbolicHeap
    roots: list
    uf: UnionFind
    forbidden: set


def _rule_view(rule: "PredicateRule") -> _RuleView | None:
    phi: SymbolicHeap = rule.constraint  # type: ignore[assignment]
    uf, ok = pure_closure(phi)
    if not ok:
        return None
    for v in rule.all_vars():
        uf.add(v)
    forbidden = {frozenset((uf.find(l.lhs), uf.find(l.rhs))) for l in phi.pure if not l.positive}
    srcs = [uf.find(c.src) for c in phi.cells]
    if len(set(srcs)) != len(srcs):
        return None
    for i, a in enumerate(srcs):
        for b in srcs[i + 1:]:
            forbidden.add(frozenset((a, b)))
    return _RuleView(rule, phi, sorted(uf.classes(), key=_key), uf, forbidden)


def _abstract_post(view: _RuleView, pairs: Sequence[AbstractPair]) -> set[AbstractPair]:
    """Abstract pairs of the goal produced by one rule from subgoal pairs."""
    rule, uf = view.rule, view.uf
    out: set[AbstractPair] = set()
    src_roots = {uf.find(c.src) for c in view.phi.cells}
    n = len(rule.goal_vars)
    for part in _partitions(view.roots, view.forbidden):
        block = {}
        for i, b in enumerate(part):
            for r in b:
                block[r] = i
        cls = {v: block[uf.find(v)] for v in rule.all_vars()}
        phi_src = {block[r] for r in src_roots}
        ok = True
        sub_alloc: dict[int, int] = {}
        for i, (atom, pair) in enumerate(zip(rule.subgoals, pairs)):
            ys = atom.args
            for r in range(len(ys)):
                for s in range(r + 1, len(ys)):
                    if ((cls[ys[r]] == cls[ys[s]]) != ((r + 1, s + 1) in pair.eq)):
                        ok = False
            for j in pair.alloc:
                c = cls[ys[j - 1]]
                if c in phi_src or sub_alloc.get(c, i) != i:
                    ok = False
                sub_alloc[c] = i
            if not ok:
                break
        if not ok:
            continue
        xs = rule.goal_vars
        eq = frozenset(
            (r + 1, s + 1) for r in range(n) for s in range(r + 1, n) if cls[xs[r]] == cls[xs[s]]
        )
        lower = {r + 1 for r in range(n) if cls[xs[r]] in phi_src or cls[xs[r]] in sub_alloc}
        maybe = set()
        for r in range(n):
            c = cls[xs[r]]
            if r + 1 in lower:
                continue
            for atom in rule.subgoals:
                if all(cls[y] != c for y in atom.args):
                    maybe.add(r + 1)
                    break
        maybe_sorted = sorted(maybe)
        for k in range(len(maybe_sorted) + 1):
            for extra in itertools.combinations(maybe_sorted, k):
                alloc = set(lower) | set(extra)
                # positions in one class share allocation
                if all((i in alloc) == (j in alloc) for i, j in eq):
                    out.add(AbstractPair(frozenset(alloc), eq))
    return out


def sh_abstract_lfp(system: "InductiveSystem") -> dict[str, set[AbstractPair]]:
    """Least fixpoint of the abstract rule operator over (A, E) pairs."""
    views = {p: [_rule_view(r) for r in system.rules_of(p)] for p in system.predicates}
    X: dict[str, set[AbstractPair]] = {p: set() for p in system.predicates}

    def pairs_of(q: str) -> set[AbstractPair]:
        if q in X:
            return X[q]
        from .system import is_universal

        if is_universal(q):
            return {pr for pr in all_pairs(len(system.predicate(q).sorts)) if not pr.alloc}
        raise KeyError(q)

    changed = True
    while changed:
        changed = False
        for p, vs in views.items():
            for view in vs:
                if view is None:
                    continue
                pools = [sorted(pairs_of(a.pred)) for a in view.rule.subgoals]
                for combo in itertools.product(*pools):
                    for pr in _abstract_post(view, combo):
                        if pr not in X[p]:
                            X[p].add(pr)
                            changed = True
    return X


@dataclass(frozen=True)
class NonFilteringWitness:
    rule: "PredicateRule"
    pairs: tuple[AbstractPair, ...]
    relation: frozenset

    def __str__(self) -> str:
        ps = ", ".join(str(p) for p in self.pairs)
        return f"rule {self.rule}: subgoal pairs [{ps}] admit no extension"


def sl_non_filtering(system: "InductiveSystem", lfp: dict | None = None):
    """∀ abstract subgoal tuples and relations C on subgoal variables with
    ω_R(P̄, C) satisfiable, check φ ∗ ω_R(P̄, C) is satisfiable for some
    choice of the goal variables."""
    lfp = sh_abstract_lfp(system) if lfp is None else lfp
    unknown: list[str] = []
    for p in system.predicates:
        for rule in system.rules_of(p):
            phi: SymbolicHeap = rule.constraint  # type: ignore[assignment]
            if not rule.subgoals:
                if sh_sat(phi) is Sat.UNSAT:
                    return Invalid(NonFilteringWitness(rule, (), frozenset()))
                continue
            view = _rule_view(rule)
            subvars = list(rule.subgoal_vars)
            pools = [sorted(lfp.get(a.pred) or _universal_pairs(system, a.pred)) for a in rule.subgoals]
            for combo in itertools.product(*pools):
                for spart in _partitions(subvars, set()):
                    scls = {}
                    for i, b in enumerate(spart):
                        for v in b:
                            scls[v] = i
                    if not _omega_sat(rule, combo, scls):
                        continue
                    if view is None or not _extends(view, combo, scls):
                        rel = frozenset(frozenset(b) for b in spart)
                        return Invalid(NonFilteringWitness(rule, tuple(combo), rel))
                    reason = _internal_clash(view, combo, scls)
                    if reason:
                        unknown.append(f"{rule}: {reason}")
    if unknown:
        return Unknown("; ".join(unknown[:3]))
    return Valid("every abstract subgoal tuple extends")


def _universal_pairs(system, q: str) -> set[AbstractPair]:
    return {pr for pr in all_pairs(len(system.predicate(q).sorts)) if not pr.alloc}


def _omega_sat(rule, pairs, scls) -> bool:
    sub_alloc: dict[int, int] = {}
    for i, (atom, pair) in enumerate(zip(rule.subgoals, pairs)):
        ys = atom.args
        for r in range(len(ys)):
            for s in range(r + 1, len(ys)):
                if (scls[ys[r]] == scls[ys[s]]) != ((r + 1, s + 1) in pair.eq):
                    return False
        for j in pair.alloc:
            c = scls[ys[j - 1]]
            if sub_alloc.get(c, i) != i:
                return False
            sub_alloc[c] = i
    return True


def _extends(view: _RuleView, pairs, scls) -> bool:
    uf = view.uf
    for part in _partitions(view.roots, view.forbidden):
        block = {}
        for i, b in enumerate(part):
            for r in b:
                block[r] = i
        cls = {v: block[uf.find(v)] for v in view.rule.all_vars()}
        subvars = view.rule.subgoal_vars
        if any(
            (cls[a] == cls[b]) != (scls[a] == scls[b]) for a in subvars for b in subvars
        ):
            continue
        phi_src = {cls[c.src] for c in view.phi.cells}
        ok = True
        for atom, pair in zip(view.rule.subgoals, pairs):
            for j in pair.alloc:
                if cls[atom.args[j - 1]] in phi_src:
                    ok = False
        if ok:
            return True
    return False


def _internal_clash(view: _RuleView, pairs, scls) -> str | None:
    """A cell whose source is forced onto a subgoal variable might collide with
    an unnamed cell of another subgoal's heap; the abstraction cannot rule it out."""
    subvars = set(view.rule.subgoal_vars)
    uf = view.uf
    for c in view.phi.cells:
        members = {v for v in subvars if uf.find(v) == uf.find(c.src)}
        if not members:
            continue
        for atom in view.rule.subgoals:
            if not (set(atom.args) & members):
                return f"cell {c} may overlap an inner cell of {atom}"
    return None
