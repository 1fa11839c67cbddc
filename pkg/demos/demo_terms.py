# Entailment between inductive predicates over terms
#
# Two predicates over the signature a, b, g/1, f/2. p holds for f(gⁿ(a), gᵐ(b));
# q additionally allows the two arguments swapped. So p ⊨ q holds and q ⊨ p
# does not.

# %%

from pathlib import Path

from indescent import check_certificate, check_restrictions, parse_system, proof_to_certificate, prove
from indescent.herbrand import h_enumerate
from indescent.parser import print_system

DATA = Path(__file__).resolve().parent.parent / "data"
system = parse_system((DATA / "fol_pq.sys").read_text())
print(print_system(system))

# %%
# A look at the languages first. Terms of p up to depth 3:

for t in h_enumerate(system, "p", 3):
    print("  p", t[0])

# %%
# The restriction checks decide whether a proof search result is conclusive.

report = check_restrictions(system)
print(report.render())

# %%
# p ⊨ q is proved. The derivation is a finite tree whose leaves are axioms or
# backlinks to an ancestor sequent.

out = prove(system, "p", ("q",))
print(out.kind, "after", out.nodes_explored, "nodes")
print(out.result.render())

# %%
# The certificate is plain JSON and is replayed without the search engine.

cert = proof_to_certificate(out.result, system)
print(check_certificate(system, cert))

# %%
# The converse fails; the counterexample is checked against both predicates.

out = prove(system, "q", ("p",))
print(out.kind, out.result.render(), "verified:", out.result.verified)
