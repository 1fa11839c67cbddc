# List segments in separation logic
#
# lsp is a nonempty list segment; lse and lso are the even and odd length
# ones; lshp is "one cell, then an even or odd segment". The last two
# describe the same heaps.

# %%

from pathlib import Path

from indescent import check_restrictions, parse_system, prove
from indescent.seplog import sh_enumerate

DATA = Path(__file__).resolve().parent.parent / "data"
system = parse_system((DATA / "sl_ls.sys").read_text())

# %%
# Small models of lsp: a store for (x, y) and the heap cells.

for args, heap, _ in sh_enumerate(system, "lsp", max_unfold=3):
    print(" ", args, heap)

# %%

print(check_restrictions(system).render())

# %%
# lse may be empty. Before searching, the engine splits such predicates into
# an empty and a nonempty part, which is why the proofs report "normalized".

for lhs, rhs in [("lsp", "lshp"), ("lshp", "lsp"), ("lse", "lsp"), ("lsp", "lso")]:
    out = prove(system, lhs, (rhs,))
    line = f"{lhs} ⊨ {rhs}: {out.kind}"
    if out.kind == "proof":
        line += f" ({out.result.size()} nodes, normalized={out.result.normalized})"
    else:
        line += f" {out.result.render()}"
    print(line)
