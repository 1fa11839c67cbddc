"""Independent reference computations for the derived constants used in the
test suite. Nothing here imports the package: terms are nested tuples,
heaps are dicts, and every answer comes from exhaustive enumeration.

Run ``python3 tests/oracles/derive_values.py`` to print the values that the
tests freeze.
"""

from __future__ import annotations

import itertools

# ---------------------------------------------------------------------------
# terms as ("f", arg, ...) tuples over the signature a, b, g/1, f/2

SIG = {"a": 0, "b": 0, "g": 1, "f": 2}


def terms(depth: int) -> list[tuple]:
    out = [(c,) for c, n in SIG.items() if n == 0]
    for _ in range(depth):
        nxt = set(out)
        for f, n in SIG.items():
            if n:
                for args in itertools.product(out, repeat=n):
                    nxt.add((f, *args))
        out = sorted(nxt, key=show)
    return out


def show(t) -> str:
    if isinstance(t, str):
        return t
    if len(t) == 1:
        return t[0]
    return t[0] + "(" + ",".join(show(a) for a in t[1:]) + ")"


def positions(t) -> list[tuple]:
    out = [t]
    for a in t[1:]:
        out += positions(a)
    return out


def g_chain(t, base: str) -> bool:
    while t[0] == "g":
        t = t[1]
    return t == (base,)


def in_p(t) -> bool:
    """The language of p: f(gⁿ(a), gᵐ(b))."""
    return t[0] == "f" and g_chain(t[1], "a") and g_chain(t[2], "b")


def in_q(t) -> bool:
    return t[0] == "f" and (
        (g_chain(t[1], "a") and g_chain(t[2], "b")) or (g_chain(t[1], "b") and g_chain(t[2], "a"))
    )


def depth(t) -> int:
    return 0 if len(t) == 1 else 1 + max(depth(a) for a in t[1:])


# ---------------------------------------------------------------------------
# symbolic substitution check for the unification example


def apply(theta: dict, t):
    if isinstance(t, str):
        return apply(theta, theta[t]) if t in theta else t
    return (t[0], *(apply(theta, a) for a in t[1:]))


# ---------------------------------------------------------------------------
# heaps over locations 0..n-1, one pointer field


def heaps(n: int):
    locs = range(n)
    for dom_size in range(n + 1):
        for dom in itertools.combinations(locs, dom_size):
            for img in itertools.product(locs, repeat=dom_size):
                yield dict(zip(dom, img))


def lsp(x: int, y: int, h: dict) -> bool:
    """x ↦ y, or x ↦ z ∗ lsp(z, y)."""
    if x not in h:
        return False
    if h == {x: y}:
        return True
    z = h[x]
    rest = {k: v for k, v in h.items() if k != x}
    return bool(rest) and lsp(z, y, rest)


def abstract(args, h) -> tuple:
    alloc = frozenset(i + 1 for i, a in enumerate(args) if a in h)
    eq = frozenset((i + 1, j + 1) for i in range(len(args)) for j in range(i + 1, len(args)) if args[i] == args[j])
    return tuple(sorted(alloc)), tuple(sorted(eq))


def main() -> None:
    # subterm positions
    t = ("f", ("g", ("a",)), ("b",))
    print("g(b) among positions of f(g(a),b):", ("g", ("b",)) in positions(t))

    # unification: apply the claimed unifier to both sides
    theta = {"x": ("a",), "z": ("g", "y")}
    lhs = ("f", "x", ("g", "y"))
    rhs = ("f", ("a",), "z")
    print("unifier equalises:", apply(theta, lhs) == apply(theta, rhs))

    # x ≈ f(y,b) ∧ ¬ y ≈ b: depth-1 search for y
    sat = [show(y) for y in terms(1) if y != ("b",)]
    print("first y with x≈f(y,b), y≠b:", sat[0])

    # x≈a ⊨ ¬x≈b: no ground x equals both
    print("x≈a ∧ x≈b satisfiable:", any(x == ("a",) and x == ("b",) for x in terms(2)))

    # x≈a ⊨ x≈g(y1): no y1 makes g(y1) equal a
    print("some y1 with a = g(y1):", any(("g", y) == ("a",) for y in terms(2)))

    # members of p and q up to depth 3
    ps = sorted((show(t) for t in terms(3) if in_p(t)))
    print("p up to depth 3:", len(ps), ps)
    print("f(b,a) in q, in p:", in_q(("f", ("b",), ("a",))), in_p(("f", ("b",), ("a",))))
    print("smallest q-not-p:", min((t for t in terms(2) if in_q(t) and not in_p(t)), key=lambda t: (depth(t), show(t))))

    # x ↦ y ⊨ emp: a one-cell heap is not empty
    print("one-cell model satisfies emp:", {0: 1} == {})

    # abstract (alloc, eq) pairs of lsp over up to three locations
    pairs = set()
    models = []
    for n in range(1, 4):
        for h in heaps(n):
            for x, y in itertools.product(range(n), repeat=2):
                if lsp(x, y, h):
                    pairs.add(abstract((x, y), h))
                    models.append((x, y, h))
    print("lsp abstract pairs:", sorted(pairs))
    print("lsp models with at most 2 cells (x,y,h):",
          sorted({(len(h), x == y) for x, y, h in models if len(h) <= 2}))

    # fvi example: φ = x≈f(x1,x1) with one subgoal on x1, ψ = x≈f(y1,y2) with one
    # subgoal on (y1,y2). Candidate images for y1, y2: variables of φ.
    sols = []
    for y1, y2 in itertools.product(["x", "x1"], repeat=2):
        # under φ, x is f(x1,x1); ψθ holds iff f(x1,x1) = f(θ y1, θ y2) syntactically
        if ("f", "x1", "x1") == ("f", y1, y2):
            sols.append((y1, y2))
    print("fvi witnesses:", sols, "tuple (x1,x1) is a subgoal tuple:", ("x1", "x1") in [("x1",)])


if __name__ == "__main__":
    main()
