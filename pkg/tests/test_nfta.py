import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from indescent import check_restrictions
from indescent.nfta import (
    Membership,
    antichain_inclusion,
    brute_force_inclusion,
    membership,
    nfta_to_system,
    parse_nfta,
    random_instance,
    random_nfta,
    run_sets,
    system_to_nfta,
    trim,
)
from indescent.terms import App, depth

a, b = App("a"), App("b")


def g(t):
    return App("g", (t,))


def f(s, t):
    return App("f", (s, t))


@pytest.fixture(scope="module")
def ex3(data_dir):
    return parse_nfta((data_dir / "example3.nfta").read_text())


def test_conversion_gives_the_example_system(ex3, fol):
    auto, queries = ex3
    system = nfta_to_system(auto, queries)
    assert sorted(map(str, system.all_rules())) == sorted(map(str, fol.all_rules()))
    assert [str(q) for q in system.queries] == ["p ⊨ q"]
    back = system_to_nfta(system)
    assert set(back.transitions) == set(auto.transitions)


def test_leaf_transition():
    auto, _ = parse_nfta("q a\n")
    (rule,) = nfta_to_system(auto).all_rules()
    assert str(rule) == "q(x) ← x≈a"


@pytest.mark.parametrize("text", ["p f q r\nq a\n", "p g q\n"])
def test_state_without_transitions_is_rejected(text):
    auto, _ = parse_nfta(text)
    with pytest.raises(ValueError, match="no transition"):
        nfta_to_system(auto)


@pytest.mark.parametrize("text", ["p\n", "entails p\np a\n", "p a q\np a\n"])
def test_malformed_nfta(text):
    with pytest.raises(ValueError):
        parse_nfta(text)


def test_membership(ex3):
    auto, _ = ex3
    assert membership(auto, "p", f(g(a), b))
    assert not membership(auto, "p", f(b, a))
    assert membership(auto, "q", f(b, a))
    assert not membership(auto, "q", g(a))


def test_antichain_inclusion(ex3):
    auto, _ = ex3
    res = antichain_inclusion(auto, "p", ["q"])
    assert res.included and res.witness is None
    assert ("p", frozenset({"q"})) in res.explored
    assert ("p1", frozenset({"q1", "q2"})) in res.explored
    back = antichain_inclusion(auto, "q", ["p"])
    assert not back.included
    assert back.witness == f(b, a)
    assert antichain_inclusion(auto, "p", ["p"]).included


def test_run_sets(ex3):
    auto, _ = ex3
    runs = run_sets(auto, 2)
    assert runs[frozenset({"q"})] == f(b, a)
    assert frozenset({"p", "q"}) in runs


def test_generator_is_deterministic():
    assert random_nfta(42) == random_nfta(42)
    assert random_instance(42) == random_instance(42)


def test_trim_drops_unproductive_and_unreachable_states():
    auto, _ = parse_nfta("p a\np g d\nd g d\nu a\n")
    t = trim(auto, "p")
    assert t.states == ("p",)
    assert [tr.symbol for tr in t.transitions] == ["a"]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_random_automata_are_trimmed_and_pass_restrictions(seed):
    auto = random_nfta(seed)
    assert auto.states[0] == "q0"
    assert any(n == 0 for n in auto.alphabet.values())
    assert trim(auto, "q0") == auto
    report = check_restrictions(nfta_to_system(auto))
    assert report.all_pass, report.render()


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000))
def test_antichain_agrees_with_brute_force(seed):
    inst = random_instance(seed)
    auto = inst.automaton
    pruned = antichain_inclusion(auto, inst.lhs, inst.rhs)
    plain = antichain_inclusion(auto, inst.lhs, inst.rhs, prune=False)
    brute = brute_force_inclusion(auto, inst.lhs, inst.rhs, 4)
    assert pruned.included == plain.included
    # bounded enumeration only refutes: agreement is exact up to the witness depth
    if not brute.included:
        assert not pruned.included
    if not pruned.included:
        deep = brute_force_inclusion(auto, inst.lhs, inst.rhs, depth(pruned.witness))
        assert not deep.included
    mem = Membership(auto)
    for res in (pruned, plain, brute):
        if not res.included:
            assert mem.accepts(inst.lhs, res.witness)
            assert not any(mem.accepts(q, res.witness) for q in inst.rhs)


def test_depth_four_brute_force_misses_deep_witnesses():
    # the smallest refuting term here has depth 5
    inst = random_instance(1596)
    auto = inst.automaton
    assert not antichain_inclusion(auto, inst.lhs, inst.rhs).included
    assert brute_force_inclusion(auto, inst.lhs, inst.rhs, 4).included
    deeper = brute_force_inclusion(auto, inst.lhs, inst.rhs, 5)
    assert not deeper.included and depth(deeper.witness) == 5
