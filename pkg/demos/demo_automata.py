# Tree automata as inductive systems
#
# A top-down tree automaton is an inductive system whose rules each consume
# one symbol. Inclusion between states is then an entailment, and the
# antichain algorithm gives an independent answer.

# %%

from pathlib import Path

from indescent import antichain_inclusion, nfta_to_system, parse_nfta, prove
from indescent.fuzz import run_campaign
from indescent.nfta import random_instance
from indescent.parser import print_system

DATA = Path(__file__).resolve().parent.parent / "data"
automaton, queries = parse_nfta((DATA / "example3.nfta").read_text())
system = nfta_to_system(automaton, queries)
print(print_system(system))

# %%

for lhs, rhs in [("p", ("q",)), ("q", ("p",))]:
    ac = antichain_inclusion(automaton, lhs, rhs)
    out = prove(system, lhs, rhs)
    print(f"{lhs} ⊆ {rhs}: antichain {ac.included} ({len(ac.explored)} pairs), search {out.kind}")

# %%
# Random instances: the search, the antichain algorithm and a bounded
# brute-force enumeration should always agree.

inst = random_instance(7)
print(inst.automaton)
print("query:", inst.lhs, "⊆", inst.rhs)

records = run_campaign(range(50))
print(sum(r.agree for r in records), "of", len(records), "instances agree")
