from types import SimpleNamespace

from indescent.proof.strategy import Strategy
from indescent.proof.structure import (
    all_violations,
    backlink_violations,
    lu_path_violations,
    maximal_paths,
    parents,
    strategy_violations,
    structured_violations,
)


def tree(*rows):
    """rows items: (rule, children, backlink)."""
    return [SimpleNamespace(id=i, rule=r, children=list(c), backlink=bl) for i, (r, c, bl) in enumerate(rows)]


GOOD = tree(
    ("LU", [1], None),
    ("RU", [2], None),
    ("RD", [3], None),
    ("SP", [4, 5], None),
    ("ID", [], 0),
    ("AX", [], None),
)


def test_good_tree_is_clean():
    assert all_violations(GOOD, Strategy()) == []
    assert maximal_paths(GOOD) == [[0, 1, 2, 3, 4], [0, 1, 2, 3, 5]]


def test_parent_problems():
    twice = tree(("LU", [1, 1], None), ("AX", [], None))
    assert parents(twice)[1][0] == 1
    orphan = tree(("AX", [], None), ("AX", [], None))
    assert parents(orphan)[1] == (1, "node is unreachable from the root")
    backwards = tree(("LU", [2], None), ("AX", [], None), ("LU", [1], None))
    assert parents(backwards)[1] is not None


def test_backlinks():
    sideways = tree(("SP", [1, 2], None), ("LU", [3], None), ("ID", [], 1), ("AX", [], None))
    assert [v[0] for v in backlink_violations(sideways)] == [2]
    opened = tree(("LU", [1], None), ("RU", [], None))
    assert backlink_violations(opened) == [(1, "open leaf")]
    stray = tree(("LU", [1], 0), ("AX", [], None))
    assert backlink_violations(stray)[0][0] == 0


def test_lu_on_direct_path():
    no_lu = tree(("LU", [1], None), ("RD", [2], None), ("SP", [3], None), ("ID", [], 1))
    assert [v[0] for v in lu_path_violations(no_lu)] == [3]
    assert lu_path_violations(tree(("LU", [1], None), ("ID", [], 0))) == []


def test_structured_derivations():
    lulu = tree(("LU", [1], None), ("LU", [2], None), ("AX", [], None))
    assert structured_violations(lulu) == [(1, "two LU steps without an RD between them")]
    assert structured_violations(GOOD) == []


def test_strategy_conformance():
    bad = tree(("RD", [1], None), ("AX", [], None))
    assert [v[0] for v in strategy_violations(bad, Strategy())] == [0]
    short = tree(("LU", [1], None), ("RU", [2], None), ("RD", [], None))
    assert strategy_violations(short, Strategy())[0][1] == "path ends outside the strategy language"
