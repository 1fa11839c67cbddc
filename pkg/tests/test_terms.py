import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from indescent.terms import (
    App,
    Signature,
    SortError,
    Subterm,
    Var,
    apply,
    subterm,
    depth,
    unify,
)

x, y, z, x1 = (Var(n, "T") for n in ("x", "y", "z", "x1"))
a, b = App("a"), App("b")


def g(t):
    return App("g", (t,))


def f(s, t):
    return App("f", (s, t))


def sig():
    return Signature({"T"}, {"a": ((), "T"), "b": ((), "T"), "g": (("T",), "T"), "f": (("T", "T"), "T")})


def terms(max_leaves=6):
    leaf = st.sampled_from([a, b, x, y, z])
    return st.recursive(
        leaf,
        lambda kids: st.one_of(kids.map(g), st.tuples(kids, kids).map(lambda p: f(*p))),
        max_leaves=max_leaves,
    )


ground = st.recursive(
    st.sampled_from([a, b]),
    lambda kids: st.one_of(kids.map(g), st.tuples(kids, kids).map(lambda p: f(*p))),
    max_leaves=5,
)


def test_subterm_examples():
    t = f(g(a), b)
    assert subterm(a, t) is Subterm.STRICT
    assert subterm(t, t) is Subterm.EQUAL
    assert subterm(g(b), f(g(a), b)) is Subterm.NOT


def test_apply_examples():
    assert apply({x: a}, f(x, y)) == f(a, y)
    assert apply({}, f(x, y)) == f(x, y)
    # simultaneous, not sequential
    assert apply({x: g(x1)}, f(x, x)) == f(g(x1), g(x1))
    assert apply({x: y, y: x}, f(x, y)) == f(y, x)


def test_unify_examples():
    assert unify([(x, f(y, b))]) == {x: f(y, b)}
    assert unify([(x, f(x, b))]) is None
    theta = unify([(f(x, g(y)), f(a, z))])
    assert theta == {x: a, z: g(y)}
    assert apply(theta, f(x, g(y))) == apply(theta, f(a, z))


def test_unify_clash():
    assert unify([(a, b)]) is None
    assert unify([(g(x), f(x, y))]) is None


def test_signature_checks_sorts():
    s = sig()
    assert "Bool" in s.sorts
    assert s.check(f(a, g(b))) == "T"
    with pytest.raises(SortError):
        s.check(App("f", (a,)))
    with pytest.raises(SortError):
        Signature({"T"}, {"c": ((), "U")})


def test_ground_terms_by_depth():
    s = sig()
    assert {str(t) for t in s.ground_terms("T", 0)} == {"a", "b"}
    assert len(s.ground_terms("T", 1)) == 2 + 2 + 4
    assert "T" in s.infinite_sorts()


@settings(max_examples=300, deadline=None)
@given(terms(), terms())
def test_unifier_is_sound_and_idempotent(s, t):
    theta = unify([(s, t)])
    if theta is None:
        return
    assert apply(theta, s) == apply(theta, t)
    for u in (s, t, f(x, y), z):
        once = apply(theta, u)
        assert apply(theta, once) == once


@settings(max_examples=200, deadline=None)
@given(terms(), terms(), st.lists(st.sampled_from([a, b]), min_size=3, max_size=3))
def test_unifier_is_most_general(s, t, values):
    # any grounding of the variables that equalises s and t factors through the mgu
    sigma = dict(zip((x, y, z), values))
    if apply(sigma, s) != apply(sigma, t):
        return
    theta = unify([(s, t)])
    assert theta is not None
    delta = unify([(apply(theta, v), apply(sigma, v)) for v in (x, y, z)])
    assert delta is not None
    for v in (x, y, z):
        assert apply(delta, apply(theta, v)) == apply(sigma, v)


@settings(max_examples=200, deadline=None)
@given(ground, ground, ground)
def test_subterm_is_a_strict_order(r, s, t):
    assert subterm(t, t) is Subterm.EQUAL
    if subterm(r, s) is Subterm.STRICT and subterm(s, t) is Subterm.STRICT:
        assert subterm(r, t) is Subterm.STRICT
    if subterm(s, t) is Subterm.STRICT:
        assert subterm(t, s) is Subterm.NOT
        assert depth(s) < depth(t)


def test_unify_many_random_pairs():
    rng = random.Random(7)

    def rand(d):
        if d == 0 or rng.random() < 0.3:
            return rng.choice([a, b, x, y, z, x1])
        return g(rand(d - 1)) if rng.random() < 0.4 else f(rand(d - 1), rand(d - 1))

    solved = 0
    for _ in range(1000):
        pairs = [(rand(3), rand(3)) for _ in range(rng.randint(1, 3))]
        theta = unify(pairs)
        if theta is None:
            continue
        solved += 1
        for s, t in pairs:
            assert apply(theta, s) == apply(theta, t)
    assert solved > 100
