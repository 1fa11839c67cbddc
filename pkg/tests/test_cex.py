import itertools

import pytest

from indescent import prove
from indescent.heaps import Heap
from indescent.proof.cex import enumerate_counterexample, verify
from indescent.proof.search import Counterexample
from indescent.terms import App

a, b = App("a"), App("b")


def f(s, t):
    return App("f", (s, t))


def test_verify_herbrand(fol):
    good = Counterexample((f(b, a),))
    verify(fol, "q", ["p"], good)
    assert good.verified and len(good.transcript) == 2
    wrong = Counterexample((f(a, b),))
    verify(fol, "q", ["p"], wrong)
    assert not wrong.verified


def test_verify_sl(sl):
    two = Counterexample((0, 2), Heap({0: (1,), 1: (2,)}))
    verify(sl, "lsp", ["lso"], two)
    assert two.verified and two.tree is not None
    one = Counterexample((0, 1), Heap({0: (1,)}))
    verify(sl, "lsp", ["lso"], one)
    assert not one.verified


def test_enumeration_fallback(fol, sl):
    assert enumerate_counterexample(fol, "q", ["p"]).args == (f(b, a),)
    assert enumerate_counterexample(fol, "p", ["q"]) is None
    assert enumerate_counterexample(sl, "lse", ["lsp"]).heap == Heap()


@pytest.mark.parametrize("which", ["fol", "sl"])
def test_engine_matches_enumeration_on_all_pairs(which, fol, sl):
    system = {"fol": fol, "sl": sl}[which]
    preds = sorted(system.predicates)
    for p, q in itertools.product(preds, repeat=2):
        if system.predicate(p).sorts != system.predicate(q).sorts:
            continue
        out = prove(system, p, [q])
        oracle = enumerate_counterexample(system, p, [q])
        if out.kind == "proof":
            assert oracle is None, (p, q, oracle.render())
        else:
            assert out.kind == "counterexample", (p, q, out.kind)
            assert oracle is not None
