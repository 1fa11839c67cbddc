"""Sequents Γ ⊢ Δ with canonical ordering and structured (de)serialisation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union

from ..heaps import PointsTo, SymbolicHeap
from ..system import Atom
from ..terms import App, LiteralConstraint, Lit, Term, Var, term_key

Constraint = Union[LiteralConstraint, SymbolicHeap]


def atom_key(a: Atom) -> tuple:
    return a.key()


def sort_atoms(atoms: Iterable[Atom]) -> tuple[Atom, ...]:
    return tuple(sorted(atoms, key=atom_key))


@dataclass(frozen=True)
class RForm:
    """A right-hand member ``∃ȳ. ψ ⊗ q₁(ȳ₁) ⊗ … ⊗ qₘ(ȳₘ)``.

    ``constraint`` None means no constraint (⊤ or emp). A bare atom has no
    existentials, no constraint and exactly one atom.
    """

    exvars: tuple[Var, ...]
    constraint: Optional[Constraint]
    atoms: tuple[Atom, ...]

    @staticmethod
    def bare(a: Atom) -> "RForm":
        return RForm((), None, (a,))

    @staticmethod
    def conj(atoms: Iterable[Atom]) -> "RForm":
        return RForm((), None, sort_atoms(atoms))

    @property
    def is_bare(self) -> bool:
        return not self.exvars and self.constraint is None and len(self.atoms) == 1

    @property
    def is_conj(self) -> bool:
        return not self.exvars and self.constraint is None

    def free_vars(self) -> frozenset[Var]:
        vs = set(v for a in self.atoms for v in a.args)
        if self.constraint is not None:
            vs |= self.constraint.vars()
        return frozenset(vs - set(self.exvars))

    def subst(self, theta: Mapping[Var, Term]) -> "RForm":
        inner = {v: t for v, t in theta.items() if v not in self.exvars}
        c = self.constraint.subst(inner) if self.constraint is not None else None
        atoms = tuple(a.subst(inner) for a in self.atoms)
        if not self.exvars:
            atoms = sort_atoms(atoms)
        return RForm(self.exvars, c, atoms)

    def key(self) -> tuple:
        """Alpha-invariant key: bound variables become their index."""
        idx = {v: i for i, v in enumerate(self.exvars)}

        def tk(t: Term):
            if isinstance(t, Var) and t in idx:
                return (0, "#b", idx[t], t.sort)
            if isinstance(t, App):
                return (1, t.fun, tuple(tk(a) for a in t.args))
            return term_key(t)

        atoms = tuple((a.pred, tuple(tk(v) for v in a.args)) for a in self.atoms)
        if self.constraint is None:
            ck: tuple = ()
        elif isinstance(self.constraint, SymbolicHeap):
            pure = sorted((not l.positive, *sorted((tk(l.lhs), tk(l.rhs)))) for l in self.constraint.pure)
            cells = sorted((tk(c.src), tuple(tk(d) for d in c.dsts)) for c in self.constraint.cells)
            ck = ("sh", tuple(pure), tuple(cells), self.constraint.has_true)
        else:
            ck = ("lc", tuple(sorted((not l.positive, *sorted((tk(l.lhs), tk(l.rhs)))) for l in self.constraint.lits)))
        sorts = tuple(v.sort for v in self.exvars)
        return (len(self.exvars), sorts, ck, atoms)

    def __str__(self) -> str:
        parts = []
        if self.constraint is not None:
            parts.append(str(self.constraint))
        sep = " ∗ " if isinstance(self.constraint, SymbolicHeap) else " ∧ "
        parts += [str(a) for a in self.atoms]
        body = sep.join(parts) if parts else "⊤"
        if self.exvars:
            return "∃" + ",".join(str(v) for v in self.exvars) + ". " + body
        return body


@dataclass(frozen=True)
class Sequent:
    constraint: Optional[Constraint]
    atoms: tuple[Atom, ...]
    rhs: tuple[RForm, ...]

    @staticmethod
    def make(constraint, atoms: Iterable[Atom], rhs: Iterable[RForm]) -> "Sequent":
        uniq: dict[tuple, RForm] = {}
        for r in rhs:
            uniq.setdefault(r.key(), r)
        ordered = tuple(uniq[k] for k in sorted(uniq))
        return Sequent(constraint, sort_atoms(atoms), ordered)

    @staticmethod
    def basic(lhs: Atom, rhs: Iterable[Atom]) -> "Sequent":
        return Sequent.make(None, [lhs], [RForm.bare(a) for a in rhs])

    def key(self) -> tuple:
        if self.constraint is None:
            ck: tuple = ()
        else:
            ck = self.constraint.key()
        return (ck, tuple(a.key() for a in self.atoms), tuple(r.key() for r in self.rhs))

    def free_vars(self) -> frozenset[Var]:
        vs = set(v for a in self.atoms for v in a.args)
        if self.constraint is not None:
            vs |= self.constraint.vars()
        for r in self.rhs:
            vs |= r.free_vars()
        return frozenset(vs)

    def all_vars(self) -> frozenset[Var]:
        vs = set(self.free_vars())
        for r in self.rhs:
            vs |= set(r.exvars)
        return frozenset(vs)

    @property
    def is_basic(self) -> bool:
        if self.constraint is not None or len(self.atoms) != 1:
            return False
        args = self.atoms[0].args
        return all(r.is_bare and r.atoms[0].args == args for r in self.rhs)

    def __str__(self) -> str:
        left = ([str(self.constraint)] if self.constraint is not None else []) + [str(a) for a in self.atoms]
        return f"{', '.join(left) or '∅'} ⊢ {', '.join(str(r) for r in self.rhs) or '∅'}"


# ---------------------------------------------------------------------------
# structured encoding used by certificates


def enc_term(t: Term):
    if isinstance(t, Var):
        return {"var": t.name, "sort": t.sort}
    return {"fun": t.fun, "args": [enc_term(a) for a in t.args]}


def dec_term(d, sig=None) -> Term:
    if "var" in d:
        return Var(d["var"], d["sort"])
    return App(d["fun"], tuple(dec_term(a, sig) for a in d["args"]))


def enc_constraint(c: Optional[Constraint]):
    if c is None:
        return None
    if isinstance(c, SymbolicHeap):
        return {
            "kind": "heap",
            "pure": [enc_lit(l) for l in c.pure],
            "cells": [{"src": enc_term(p.src), "dsts": [enc_term(d) for d in p.dsts]} for p in c.cells],
            "true": c.has_true,
        }
    return {"kind": "lits", "lits": [enc_lit(l) for l in c.lits]}


def enc_lit(l: Lit):
    return {"pos": l.positive, "lhs": enc_term(l.lhs), "rhs": enc_term(l.rhs)}


def dec_lit(d) -> Lit:
    return Lit(bool(d["pos"]), dec_term(d["lhs"]), dec_term(d["rhs"]))


def dec_constraint(d) -> Optional[Constraint]:
    if d is None:
        return None
    if d["kind"] == "heap":
        cells = tuple(
            PointsTo(dec_term(c["src"]), tuple(dec_term(x) for x in c["dsts"])) for c in d["cells"]
        )
        return SymbolicHeap(tuple(dec_lit(l) for l in d["pure"]), cells, bool(d["true"]))
    return LiteralConstraint(dec_lit(l) for l in d["lits"])


def enc_atom(a: Atom):
    return {"pred": a.pred, "args": [enc_term(v) for v in a.args]}


def dec_atom(d) -> Atom:
    return Atom(d["pred"], tuple(dec_term(v) for v in d["args"]))  # type: ignore[misc]


def enc_rform(r: RForm):
    return {
        "exists": [enc_term(v) for v in r.exvars],
        "constraint": enc_constraint(r.constraint),
        "atoms": [enc_atom(a) for a in r.atoms],
    }


def dec_rform(d) -> RForm:
    return RForm(
        tuple(dec_term(v) for v in d["exists"]),  # type: ignore[misc]
        dec_constraint(d["constraint"]),
        tuple(dec_atom(a) for a in d["atoms"]),
    )


def enc_sequent(s: Sequent):
    return {
        "constraint": enc_constraint(s.constraint),
        "atoms": [enc_atom(a) for a in s.atoms],
        "rhs": [enc_rform(r) for r in s.rhs],
    }


def dec_sequent(d) -> Sequent:
    return Sequent(
        dec_constraint(d["constraint"]),
        tuple(dec_atom(a) for a in d["atoms"]),
        tuple(dec_rform(r) for r in d["rhs"]),
    )


def enc_subst(theta: Mapping[Var, Term]):
    return [[enc_term(v), enc_term(t)] for v, t in sorted(theta.items(), key=lambda kv: term_key(kv[0]))]


def dec_subst(d) -> dict[Var, Term]:
    return {dec_term(a): dec_term(b) for a, b in d}  # type: ignore[misc]


def canonical(s: Sequent) -> tuple[tuple, dict[Var, Var]]:
    """Key shared by alpha-equivalent sequents, and the renaming into it.

    Free variables are numbered by first occurrence over a name-blind order
    of the atoms and right members; ties can only cost sharing, never merge
    sequents that differ. The result is cached on the sequent.
    """
    hit = s.__dict__.get("_canonical")
    if hit is not None:
        return hit

    def blind(t: Term):
        return ("v", t.sort) if isinstance(t, Var) else (t.fun, tuple(blind(a) for a in t.args))

    order: list[Var] = []

    def visit(t: Term) -> None:
        if isinstance(t, Var):
            if t not in order:
                order.append(t)
        else:
            for a in t.args:
                visit(a)

    for a in sorted(s.atoms, key=lambda a: (a.pred, tuple(blind(x) for x in a.args))):
        for x in a.args:
            visit(x)
    for r in sorted(s.rhs, key=lambda r: tuple((a.pred, tuple(blind(x) for x in a.args)) for a in r.atoms)):
        bound = set(r.exvars)
        for a in r.atoms:
            for x in a.args:
                if not (isinstance(x, Var) and x in bound):
                    visit(x)
    rest = sorted(s.free_vars() - set(order), key=term_key)
    order += rest
    ren = {v: Var(f"#{i}", v.sort) for i, v in enumerate(order)}
    c = s.constraint.subst(ren) if s.constraint is not None else None
    renamed = Sequent.make(c, [a.subst(ren) for a in s.atoms], [r.subst(ren) for r in s.rhs])
    out = (renamed.key(), ren)
    object.__setattr__(s, "_canonical", out)
    return out
