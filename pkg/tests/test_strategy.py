import pytest

from indescent.proof.strategy import DEFAULT_STRATEGY, LABELS, Strategy, StrategyError


def test_default_accepts_typical_branches():
    s = Strategy()
    assert s.text == DEFAULT_STRATEGY
    assert s.accepts(["LU", "RU", "RD", "SP", "ID"])
    assert s.accepts(["LU", "RU", "RU", "RD", "AR", "AR", "SP", "LU", "RU", "RD", "AX"])
    assert s.accepts(["AX"])
    assert s.accepts(["LU", "AX"])
    assert s.accepts(["LU", "RU", "RU", "AX"])


def test_default_rejects():
    s = Strategy()
    # two unfoldings of the left side without an RD in between
    assert not s.accepts(["LU", "LU", "AX"])
    assert not s.accepts(["RD", "AX"])
    assert not s.accepts(["LU", "RU", "RD"])
    assert not s.is_prefix(["SP"])
    assert s.is_prefix(["LU", "RU"])


def test_aliases_and_custom_regex():
    s = Strategy("(LU ∧R)* AX_SL")
    assert s.accepts(["LU", "AR", "AX"])
    assert not s.accepts(["LU", "AX", "AX"])
    only_ax = Strategy("AX")
    assert only_ax.allows_final(only_ax.start, "AX")
    assert not only_ax.allows(only_ax.start, "LU")


def test_dead_states_are_pruned():
    s = Strategy("LU AX | RU")
    assert s.allows(s.start, "LU")
    nxt = s.step(s.start, "LU")
    assert s.allows_final(nxt, "AX")
    assert not s.allows(nxt, "RU")


@pytest.mark.parametrize("bad", ["(LU", "FOO", "LU )", "*", "AX ? ?x"])
def test_malformed_strategies(bad):
    with pytest.raises(StrategyError):
        Strategy(bad)


def test_empty_alternative_is_epsilon():
    s = Strategy("(LU |) AX")
    assert s.accepts(["AX"]) and s.accepts(["LU", "AX"])


def test_label_alphabet():
    assert set(LABELS) == {"LU", "RU", "RD", "AR", "SP", "AX", "ID"}
