"""The rule schemata LU, RU, RD, ∧R, SP, AX and ID as pure functions on
sequents. Every function returns its antecedents together with the data a
checker needs to replay the step."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from ..system import Atom, universal_name
from ..terms import FreshNames, Term, Var
from .sequent import RForm, Sequent
from .theory import TheoryOps, flat_injective


class NotApplicable(Exception):
    pass


# ---------------------------------------------------------------------------
# unfolding


def _instances(ops: TheoryOps, atom: Atom, renamings: Optional[Sequence[Mapping[Var, Var]]], fresh: Optional[FreshNames]):
    rules = ops.system.rules_of(atom.pred)
    if renamings is None:
        assert fresh is not None
        renamings = [fresh.rename(r.subgoal_vars) for r in rules]
    if len(renamings) != len(rules):
        raise NotApplicable(f"{atom.pred} has {len(rules)} rules, got {len(renamings)} renamings")
    out = []
    for r, ren in zip(rules, renamings):
        if set(ren) != set(r.subgoal_vars):
            raise NotApplicable(f"renaming for {r} does not cover its subgoal variables")
        c, subs = r.instantiate(atom.args, dict(ren))
        out.append((r, dict(ren), c, subs))
    return out


def apply_lu(ops: TheoryOps, s: Sequent, index: int, fresh: FreshNames | None = None,
             renamings=None) -> tuple[list[Sequent], list[dict]]:
    if not 0 <= index < len(s.atoms):
        raise NotApplicable("no left atom at that position")
    atom = s.atoms[index]
    rest = s.atoms[:index] + s.atoms[index + 1:]
    kids, rens = [], []
    for _, ren, c, subs in _instances(ops, atom, renamings, fresh):
        kids.append(Sequent.make(ops.conj(s.constraint, c), rest + subs, s.rhs))
        rens.append(ren)
    return kids, rens


def apply_ru(ops: TheoryOps, s: Sequent, index: int, fresh: FreshNames | None = None,
             renamings=None) -> tuple[Sequent, list[dict]]:
    if not 0 <= index < len(s.rhs) or not s.rhs[index].is_bare:
        raise NotApplicable("no bare right atom at that position")
    atom = s.rhs[index].atoms[0]
    forms, rens = [], []
    for r, ren, c, subs in _instances(ops, atom, renamings, fresh):
        forms.append(RForm(tuple(ren[v] for v in r.subgoal_vars), c, tuple(subs)))
        rens.append(ren)
    rest = s.rhs[:index] + s.rhs[index + 1:]
    return Sequent.make(s.constraint, s.atoms, rest + tuple(forms)), rens


def first_bare(s: Sequent) -> Optional[int]:
    for i, r in enumerate(s.rhs):
        if r.is_bare:
            return i
    return None


# ---------------------------------------------------------------------------
# reduction


def rd_witnesses(ops: TheoryOps, s: Sequent) -> list[Optional[list[dict]]]:
    """Per right member: its flat witness set, or None when not entailed."""
    if s.constraint is None:
        raise NotApplicable("RD needs a constraint on the left")
    x_tuples = [a.args for a in s.atoms]
    out: list[Optional[list[dict]]] = []
    for r in s.rhs:
        if r.is_bare:
            raise NotApplicable("RD needs every right member unfolded")
        y_tuples = [a.args for a in r.atoms]
        if set(r.exvars) - {v for t in y_tuples for v in t}:
            ws = []
        elif r.exvars:
            ws = ops.witnesses(s.constraint, x_tuples, r.constraint, y_tuples)
        else:
            ws = [{}] if ops.entails(s.constraint, r.constraint) else []
        out.append(ws or None)
    return out


def rd_result(ops: TheoryOps, s: Sequent, chosen: Sequence[Optional[Sequence[Mapping[Var, Term]]]]) -> Sequent:
    """The antecedent of RD for the chosen witness subsets, after padding."""
    tuples = []
    for a in s.atoms:
        if a.args not in tuples:
            tuples.append(a.args)
    members: list[RForm] = []
    for r, thetas in zip(s.rhs, chosen):
        for theta in thetas or ():
            atoms = [a.subst(theta) for a in r.atoms]
            norm = ops.dedupe_conj(atoms)
            if norm is None:
                continue
            covered = {a.args for a in norm}
            for t in tuples:
                if t not in covered:
                    norm.append(Atom(universal_name([v.sort for v in t]), t))
            members.append(RForm.conj(norm))
    return Sequent.make(None, s.atoms, members)


def apply_rd(ops: TheoryOps, s: Sequent) -> tuple[Sequent, list[Optional[list[dict]]]]:
    ws = rd_witnesses(ops, s)
    return rd_result(ops, s, ws), ws


# ---------------------------------------------------------------------------
# ∧R


def and_r_target(s: Sequent) -> Optional[tuple[int, int, int]]:
    """(member, atom i, atom j) of the first conjunction with two distinct
    atoms over one argument tuple."""
    for m, r in enumerate(s.rhs):
        if not r.is_conj or len(r.atoms) < 2:
            continue
        for i, j in itertools.combinations(range(len(r.atoms)), 2):
            if r.atoms[i].args == r.atoms[j].args and r.atoms[i] != r.atoms[j]:
                return m, i, j
    return None


def apply_and_r(s: Sequent, member: int, i: int, j: int) -> list[Sequent]:
    if not 0 <= member < len(s.rhs):
        raise NotApplicable("no such right member")
    r = s.rhs[member]
    if not r.is_conj or not (0 <= i < j < len(r.atoms)) or r.atoms[i].args != r.atoms[j].args:
        raise NotApplicable("atoms do not share their arguments")
    rest = s.rhs[:member] + s.rhs[member + 1:]
    keep_i = RForm.conj(a for k, a in enumerate(r.atoms) if k != j)
    keep_j = RForm.conj(a for k, a in enumerate(r.atoms) if k != i)
    return [Sequent.make(s.constraint, s.atoms, rest + (keep_i,)),
            Sequent.make(s.constraint, s.atoms, rest + (keep_j,))]


# ---------------------------------------------------------------------------
# split


@dataclass(frozen=True)
class SPShape:
    left: tuple[Atom, ...]
    table: tuple[tuple[Atom, ...], ...]  # table[ℓ][i]: atom of member ℓ on tuple i

    @property
    def n(self) -> int:
        return len(self.left)

    @property
    def k(self) -> int:
        return len(self.table)

    def choice_functions(self):
        return itertools.product(range(self.n), repeat=self.k)

    def antecedent(self, f: Sequence[int], i: int) -> Sequent:
        a = self.left[i]
        rhs = [RForm.bare(self.table[l][i]) for l in range(self.k) if f[l] == i]
        return Sequent.make(None, [a], rhs)


def sp_shape(s: Sequent) -> Optional[SPShape]:
    if s.constraint is not None or not s.atoms:
        return None
    tuples = [a.args for a in s.atoms]
    seen: set[Var] = set()
    for t in tuples:
        if seen & set(t):
            return None
        seen |= set(t)
    if len(set(tuples)) != len(tuples):
        return None
    table = []
    for r in s.rhs:
        if not r.is_conj:
            return None
        by_args = {}
        for a in r.atoms:
            if a.args in by_args:
                return None
            by_args[a.args] = a
        if set(by_args) != set(tuples):
            return None
        table.append(tuple(by_args[t] for t in tuples))
    return SPShape(s.atoms, tuple(table))


def apply_sp(s: Sequent, ivec: Mapping[tuple[int, ...], int]) -> list[Sequent]:
    """All n^k antecedents for a choice vector, duplicates merged, in
    lexicographic order of the choice functions."""
    shape = sp_shape(s)
    if shape is None:
        raise NotApplicable("SP needs disjoint left tuples and covering conjunctions")
    out: dict[tuple, Sequent] = {}
    for f in shape.choice_functions():
        if f not in ivec:
            raise NotApplicable(f"choice vector misses {f}")
        seq = shape.antecedent(f, ivec[f])
        out.setdefault(seq.key(), seq)
    return list(out.values())


# ---------------------------------------------------------------------------
# axioms


def try_ax(ops: TheoryOps, s: Sequent) -> Optional[dict]:
    if ops.unsat(s.constraint):
        return {"unsat": True}
    x_tuples = [a.args for a in s.atoms]
    for j, r in enumerate(s.rhs):
        theta = ax_member(ops, s, r, x_tuples)
        if theta is not None:
            return {"member": j, "theta": theta}
    return None


def ax_member(ops: TheoryOps, s: Sequent, r: RForm, x_tuples) -> Optional[dict]:
    y_tuples = [a.args for a in r.atoms]
    if set(r.exvars) - {v for t in y_tuples for v in t}:
        return None
    if r.exvars:
        cands = ops.witnesses(s.constraint, x_tuples, r.constraint, y_tuples)
    else:
        cands = [{}]
    for theta in cands:
        if check_ax_member(ops, s, r, theta):
            return theta
    return None


def check_ax_member(ops: TheoryOps, s: Sequent, r: RForm, theta: Mapping[Var, Term]) -> bool:
    if set(theta) != set(r.exvars):
        return False
    psi = r.constraint.subst(theta) if r.constraint is not None else None
    if not ops.entails(s.constraint, psi):
        return False
    return ops.covers(s.atoms, [a.subst(theta) for a in r.atoms])


# ---------------------------------------------------------------------------
# backlinks


def match_id(pivot: Sequent, s: Sequent) -> Optional[dict[Var, Var]]:
    """A flat injective θ with Γ_p θ = Γ and Δ_p θ ⊆ Δ (constraint-free Γ)."""
    if pivot.constraint is not None or s.constraint is not None:
        return None
    if len(pivot.atoms) != len(s.atoms):
        return None
    targets = {r.key() for r in s.rhs}

    def extend(i: int, theta: dict, used: set) -> Optional[dict]:
        if i == len(pivot.atoms):
            if sorted(a.subst(theta).key() for a in pivot.atoms) != sorted(a.key() for a in s.atoms):
                return None
            for r in pivot.rhs:
                if not r.free_vars() <= set(theta):
                    return None
                if r.subst(theta).key() not in targets:
                    return None
            return theta
        a = pivot.atoms[i]
        for b in s.atoms:
            if b.pred != a.pred or len(b.args) != len(a.args):
                continue
            t2, u2, ok = dict(theta), set(used), True
            for v, w in zip(a.args, b.args):
                if v in t2:
                    if t2[v] != w:
                        ok = False
                        break
                elif w in u2 or v.sort != w.sort:
                    ok = False
                    break
                else:
                    t2[v] = w
                    u2.add(w)
            if ok:
                got = extend(i + 1, t2, u2)
                if got is not None:
                    return got
        return None

    return extend(0, {}, set())


def check_id(pivot: Sequent, s: Sequent, theta: Mapping[Var, Term]) -> Optional[str]:
    """None when θ justifies the backlink, else the violated condition."""
    if pivot.constraint is not None or s.constraint is not None:
        return "ID needs constraint-free sequents"
    if not flat_injective(theta):
        return "θ is not flat and injective"
    if any(v.sort != t.sort for v, t in theta.items()):  # type: ignore[union-attr]
        return "θ changes sorts"
    if sorted(a.subst(theta).key() for a in pivot.atoms) != sorted(a.key() for a in s.atoms):
        return "Γ_p θ differs from Γ"
    targets = {r.key() for r in s.rhs}
    for r in pivot.rhs:
        if r.subst(theta).key() not in targets:
            return f"pivot member {r} is not in Δ under θ"
    return None


def fresh_ok(parent: Sequent, renamings: Sequence[Mapping[Var, Var]]) -> bool:
    used = parent.all_vars()
    new: list[Var] = [w for ren in renamings for w in ren.values()]
    return (
        all(isinstance(w, Var) for w in new)
        and len(set(new)) == len(new)
        and not (set(new) & used)
    )


__all__ = [
    "NotApplicable",
    "SPShape",
    "and_r_target",
    "apply_and_r",
    "apply_lu",
    "apply_rd",
    "apply_ru",
    "apply_sp",
    "ax_member",
    "check_ax_member",
    "check_id",
    "first_bare",
    "fresh_ok",
    "match_id",
    "rd_result",
    "rd_witnesses",
    "sp_shape",
    "try_ax",
]
