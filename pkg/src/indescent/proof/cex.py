"""Counterexample extraction from a failed derivation and its concrete
verification against the original system."""

from __future__ import annotations

import itertools
from typing import Optional, Sequence

from ..heaps import Heap, SymbolicHeap
from ..herbrand import h_least_solution_cached, h_member, h_small_members, h_solve
from ..seplog import SLMembership, UnionFind, sh_enumerate
from ..system import Atom, InductiveSystem, Theory, is_universal
from ..terms import App, depth

_CANDIDATES = 40

# A model is a pair (valuation, heap); the heap is None for Herbrand.
Model = tuple[dict, Optional[Heap]]


class _Builder:
    def __init__(self, engine) -> None:
        self.engine = engine
        self.system: InductiveSystem = engine.system
        self.sl = self.system.theory is Theory.SEPLOG
        self.next_loc = 0
        self._cands: dict[str, list] = {}
        self._small = None

    # -- candidate members per predicate ----------------------------------

    def candidates(self, pred: str):
        """Members of pred, shallow ones first; deeper levels are computed
        only when the shallow ones are exhausted."""
        if self.sl:
            if pred not in self._cands:
                models = sorted(sh_enumerate(self.system, pred, max_unfold=3),
                                key=lambda m: (len(m[1]), m[0], str(m[1])))
                self._cands[pred] = [(m[0], m[1]) for m in models[:_CANDIDATES]]
            yield from self._cands[pred]
            return
        seen = set()
        if self._small is None:
            self._small = h_small_members(self.system)
        small = self._small.get(pred)
        if small is not None:
            seen.add(small)
            yield small
        for d in (2, 3):
            sol = h_least_solution_cached(self.system, d).get(pred, set())
            for t in sorted(sol, key=lambda t: (max([depth(x) for x in t] + [0]), str(t))):
                if t not in seen and len(seen) < _CANDIDATES:
                    seen.add(t)
                    yield t

    # -- per-node models ----------------------------------------------------

    def model(self, nid: int) -> Optional[Model]:
        node = self.engine.nodes[nid]
        if "dead_ref" in node.witness:
            m = self.model(node.witness["dead_ref"])
            if m is None:
                return None
            ren = node.witness["renaming"]
            return {ren[v]: x for v, x in m[0].items() if v in ren}, m[1]
        if node.rule is None:
            return self.leaf(node.sequent.atoms)
        if node.rule in ("LU", "RU", "AR"):
            return self.model(node.witness["dead_child"])
        if node.rule == "RD":
            m = self.model(node.witness["dead_child"])
            return None if m is None else self.extend(node.sequent.constraint, m)
        if node.rule == "SP":
            val: dict = {}
            heap: dict = {}
            for cid in node.children:
                m = self.model(cid)
                if m is None:
                    return None
                for v, x in m[0].items():
                    if val.setdefault(v, x) != x:
                        return None
                if m[1] is not None:
                    if set(m[1]) & set(heap):
                        return None
                    heap.update(m[1])
            return val, (Heap(heap) if self.sl else None)
        return None

    def leaf(self, atoms: Sequence[Atom]) -> Optional[Model]:
        if self.sl:
            return self._sl_leaf(list(atoms), {}, {})
        return self._h_leaf(list(atoms), {})

    def _h_leaf(self, atoms: list[Atom], val: dict) -> Optional[Model]:
        if not atoms:
            return dict(val), None
        a, rest = atoms[0], atoms[1:]
        if is_universal(a.pred):
            pools = [self.system.signature.ground_terms(v.sort, 1) for v in a.args]
            cands = [tuple(p[0] for p in pools)] if all(pools) else []
        else:
            cands = self.candidates(a.pred)
        for tup in cands:
            if all(val.get(v, t) == t for v, t in zip(a.args, tup)):
                got = self._h_leaf(rest, {**val, **dict(zip(a.args, tup))})
                if got is not None:
                    return got
        return None

    def _fresh(self) -> int:
        self.next_loc += 1
        return self.next_loc - 1

    def _sl_leaf(self, atoms: list[Atom], val: dict, heap: dict) -> Optional[Model]:
        if not atoms:
            return dict(val), Heap(heap)
        a, rest = atoms[0], atoms[1:]
        if is_universal(a.pred):
            cands = [(tuple(range(len(a.args))), Heap({}))]
        else:
            cands = self.candidates(a.pred)
        for tup, h in cands:
            ren: dict[int, int] = {}
            ok = True
            for v, loc in zip(a.args, tup):
                want = val.get(v)
                if want is None:
                    continue
                if ren.setdefault(loc, want) != want:
                    ok = False
                    break
            if not ok or len(set(ren.values())) != len(ren):
                continue
            for loc in sorted(set(tup) | h.locations()):
                if loc not in ren:
                    ren[loc] = self._fresh()
            new_heap = h.rename(ren)
            if set(new_heap) & set(heap):
                continue
            val2 = dict(val)
            for v, loc in zip(a.args, tup):
                val2[v] = ren[loc]
            got = self._sl_leaf(rest, val2, {**heap, **dict(new_heap.items())})
            if got is not None:
                return got
        return None

    def extend(self, phi, m: Model) -> Optional[Model]:
        val, heap = m
        if phi is None:
            return m
        if not self.sl:
            fixed = {v: t for v, t in val.items() if isinstance(t, App)}
            got = h_solve(phi, fixed, self.system.signature, max_depth=3)
            return None if got is None else ({**val, **got}, None)
        assert isinstance(phi, SymbolicHeap) and heap is not None
        uf = UnionFind(phi.vars() | set(val))
        for l in phi.pure:
            if l.positive:
                uf.union(l.lhs, l.rhs)
        loc: dict = {}
        for v, x in val.items():
            if loc.setdefault(uf.find(v), x) != x:
                return None
        out = dict(val)
        for v in uf.parent:
            r = uf.find(v)
            if r not in loc:
                loc[r] = self._fresh()
            out[v] = loc[r]
        for l in phi.pure:
            if not l.positive and out[l.lhs] == out[l.rhs]:
                return None
        cells = dict(heap.items())
        for c in phi.cells:
            src = out[c.src]
            if src in cells:
                return None
            cells[src] = tuple(out[d] for d in c.dsts)
        return out, Heap(cells)


def extract_counterexample(engine, rid: int, original: InductiveSystem, lhs: str, rhs: Sequence[str]):
    """Walk the failing branch down to a dead leaf, build a model there and
    lift it back to the root; fall back to bounded enumeration."""
    from .search import Counterexample

    builder = _Builder(engine)
    m = builder.model(rid)
    root = engine.nodes[rid].sequent.atoms[0]
    cex = None
    if m is not None:
        val, heap = m
        args = tuple(val.get(v) for v in root.args)
        if all(a is not None for a in args):
            cex = Counterexample(args, heap, transcript=["model lifted from the failing branch"])
            verify(original, lhs, rhs, cex)
            if cex.verified:
                return cex
    found = enumerate_counterexample(original, lhs, rhs)
    if found is not None:
        found.transcript.insert(0, "failing branch gave no model; found by bounded enumeration")
        return found
    if cex is not None:
        return cex
    return Counterexample((), None, False, ["no model could be built for the failing branch"])


def verify(system: InductiveSystem, lhs: str, rhs: Sequence[str], cex) -> None:
    if system.theory is Theory.SEPLOG:
        verify_sl(system, lhs, rhs, cex)
    else:
        verify_herbrand(system, lhs, rhs, cex)


def verify_herbrand(system: InductiveSystem, lhs: str, rhs: Sequence[str], cex) -> None:
    tup = tuple(cex.args)
    d = max([depth(t) for t in tup] + [0])
    in_p = h_member(system, lhs, tup, d)
    cex.transcript.append(f"{lhs}{_show(tup)} holds: {in_p} (open values up to depth {d})")
    outs = []
    for q in rhs:
        in_q = h_member(system, q, tup, d + 2)
        outs.append(in_q)
        cex.transcript.append(f"{q}{_show(tup)} holds: {in_q} (open values up to depth {d + 2})")
    cex.verified = in_p and not any(outs)


def verify_sl(system: InductiveSystem, lhs: str, rhs: Sequence[str], cex) -> None:
    mem = SLMembership(system)
    heap = cex.heap if cex.heap is not None else Heap({})
    tree = mem.member(lhs, cex.args, heap)
    cex.tree = tree
    cex.transcript.append(f"{lhs}{_show(cex.args)} on {heap}: {'unfolds' if tree else 'no unfolding'}")
    outs = []
    for q in rhs:
        t = mem.member(q, cex.args, heap)
        outs.append(t is not None)
        cex.transcript.append(f"{q}{_show(cex.args)} on {heap}: {'unfolds' if t else 'no unfolding'}")
    cex.verified = tree is not None and not any(outs)


def enumerate_counterexample(system: InductiveSystem, lhs: str, rhs: Sequence[str], limit: int = 400):
    """Smallest member of lhs outside every rhs predicate among shallow models."""
    from .search import Counterexample

    if system.theory is Theory.SEPLOG:
        models = sorted(sh_enumerate(system, lhs, max_unfold=4), key=lambda m: (len(m[1]), m[0], str(m[1])))
        for tup, heap, _ in itertools.islice(models, limit):
            cex = Counterexample(tup, heap)
            verify_sl(system, lhs, rhs, cex)
            if cex.verified:
                return cex
        return None
    for d in (2, 3):
        sol = h_least_solution_cached(system, d).get(lhs, set())
        for tup in itertools.islice(sorted(sol, key=lambda t: (max([depth(x) for x in t] + [0]), str(t))), limit):
            cex = Counterexample(tup, None)
            verify_herbrand(system, lhs, rhs, cex)
            if cex.verified:
                return cex
    return None


def _show(args) -> str:
    return "(" + ", ".join(str(a) for a in args) + ")"
