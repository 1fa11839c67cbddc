"""Differential campaign: proof search against downward antichain inclusion
against bounded brute force, on random tree-automata inclusion queries."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from typing import Iterable, Optional

from .nfta import (
    Membership,
    antichain_inclusion,
    brute_force_inclusion,
    nfta_to_system,
    random_instance,
)
from .proof.search import Counterexample, Limits, Proof, Prover


@dataclass
class FuzzRecord:
    seed: int
    lhs: str
    rhs: tuple[str, ...]
    engine: str  # "included" | "not-included" | "unknown"
    antichain: bool
    brute_force: bool
    engine_witness: Optional[str]
    antichain_witness: Optional[str]
    witnesses_ok: bool
    seconds: float

    @property
    def agree(self) -> bool:
        mine = {"included": True, "not-included": False}.get(self.engine)
        return mine is not None and mine == self.antichain == self.brute_force and self.witnesses_ok

    def line(self) -> str:
        flag = "ok " if self.agree else "BAD"
        return (f"{flag} seed={self.seed:<5} {self.lhs} ⊆ {{{','.join(self.rhs)}}}: engine={self.engine} "
                f"antichain={self.antichain} brute={self.brute_force}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rhs"] = list(self.rhs)
        d["agree"] = self.agree
        return d


def fuzz_instance(seed: int, max_states: int = 5, max_rank: int = 2, max_symbols: int = 4,
                  depth: int = 4, limits: Limits | None = None) -> FuzzRecord:
    inst = random_instance(seed, max_states, max_rank, max_symbols)
    a = inst.automaton
    started = time.monotonic()
    out = Prover(nfta_to_system(a), limits=limits).prove(inst.lhs, inst.rhs)
    ac = antichain_inclusion(a, inst.lhs, inst.rhs)
    bf = brute_force_inclusion(a, inst.lhs, inst.rhs, depth)
    mem = Membership(a)

    def refutes(t) -> bool:
        return mem.accepts(inst.lhs, t) and not any(mem.accepts(q, t) for q in inst.rhs)

    ok = True
    engine_w = None
    if isinstance(out.result, Proof):
        engine = "included"
    elif isinstance(out.result, Counterexample) and out.result.verified:
        engine = "not-included"
        t = out.result.args[0]
        engine_w = str(t)
        ok &= refutes(t)
    else:
        engine = "unknown"
    if not ac.included:
        ok &= refutes(ac.witness)
    if not bf.included:
        ok &= refutes(bf.witness)
    return FuzzRecord(
        seed, inst.lhs, inst.rhs, engine, ac.included, bf.included, engine_w,
        None if ac.witness is None else str(ac.witness), ok, time.monotonic() - started,
    )


def run_campaign(seeds: Iterable[int], **kw) -> list[FuzzRecord]:
    return [fuzz_instance(s, **kw) for s in seeds]
