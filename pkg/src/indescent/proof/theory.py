"""Theory-specific hooks used by the rule schemata: ⊗, entailment, witnesses
and how predicate atoms are matched inside AX."""

from __future__ import annotations

from collections import Counter
from typing import Mapping, Optional, Sequence

from ..heaps import EMP
from ..herbrand import Sat, WitnessMode, h_entails, h_sat, h_witnesses
from ..seplog import sh_entails, sh_sat, sh_witnesses
from ..system import Atom, InductiveSystem, Theory, is_universal
from ..terms import TOP, Term, Var


class TheoryOps:
    def __init__(self, system: InductiveSystem) -> None:
        self.system = system
        self.sl = system.theory is Theory.SEPLOG

    @property
    def unit(self):
        return EMP if self.sl else TOP

    def or_unit(self, c):
        return self.unit if c is None else c

    def conj(self, a, b):
        if a is None:
            return b
        if b is None:
            return a
        return a.conj(b)

    def unsat(self, c) -> bool:
        if c is None:
            return False
        if self.sl:
            return sh_sat(c) is Sat.UNSAT
        return h_sat(c, self.system.signature) is Sat.UNSAT

    def entails(self, phi, psi) -> bool:
        """φ ⊨ ψ for a ψ whose variables are all free in the sequent."""
        phi, psi = self.or_unit(phi), self.or_unit(psi)
        if self.sl:
            return sh_entails(phi, psi)
        return h_entails(phi, psi, self.system.signature)

    def witnesses(self, phi, x_tuples, psi, y_tuples) -> list[dict[Var, Term]]:
        """Flat tuple-wise substitutions θ with φ ⊨ ψθ, in deterministic order."""
        phi, psi = self.or_unit(phi), self.or_unit(psi)
        if self.sl:
            ws = sh_witnesses(phi, x_tuples, psi, y_tuples)
        else:
            ws = h_witnesses(phi, x_tuples, psi, y_tuples, self.system.signature, WitnessMode.FLAT_ONLY)
        return [dict(t) for t in ws]

    def covers(self, gamma_atoms: Sequence[Atom], delta_atoms: Sequence[Atom]) -> bool:
        """Atoms of a right member are implied by Γ's atoms read as
        uninterpreted: a sub-multiset (Herbrand) or the same multiset (SL).
        Universal atoms are ⊤ (Herbrand) or emp (SL) and never need a match."""
        want = Counter(a for a in delta_atoms if not is_universal(a.pred))
        have = Counter(a for a in gamma_atoms if not is_universal(a.pred))
        if self.sl:
            return want == have
        return all(have[a] >= n for a, n in want.items())

    def dedupe_conj(self, atoms: Sequence[Atom]) -> Optional[list[Atom]]:
        """Normalise a conjunction of atoms after RD; None drops the member."""
        non_u = [a for a in atoms if not is_universal(a.pred)]
        if self.sl:
            args = [a.args for a in non_u]
            if len(set(args)) != len(args):
                # p(x̄) ∗ q(x̄) needs two disjoint heaps on one tuple: dropping
                # the member only strengthens the goal
                return None
            out = list(non_u)
        else:
            out = list(dict.fromkeys(non_u))
        covered = {a.args for a in out}
        for a in atoms:
            if is_universal(a.pred) and a.args not in covered:
                out.append(a)
                covered.add(a.args)
        return out


def flat_injective(theta: Mapping[Var, Term]) -> bool:
    vals = list(theta.values())
    return all(isinstance(v, Var) for v in vals) and len(set(vals)) == len(vals)

