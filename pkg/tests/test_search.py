import pytest

from indescent import Limits, Prover, prove
from indescent.heaps import Heap
from indescent.herbrand import h_member
from indescent.proof.search import Counterexample, Proof, ResourceExhausted
from indescent.proof.strategy import Strategy
from indescent.proof.structure import all_violations
from indescent.seplog import sl_member
from indescent.terms import App

a, b = App("a"), App("b")


def f(s, t):
    return App("f", (s, t))


def test_example_proof(fol):
    out = prove(fol, "p", ["q"])
    assert out.kind == "proof"
    proof = out.result
    assert proof.labels()[:4] == ["LU", "RU", "RD", "SP"]
    assert str(proof.root.sequent) == "p(x) ⊢ q(x)"
    assert "ID" in proof.labels()
    leaves = [n for n in proof.nodes if not n.children]
    assert {n.rule for n in leaves} == {"AX", "ID"}
    assert all_violations(proof.nodes, Strategy()) == []


def test_example_counterexample(fol):
    out = prove(fol, "q", ["p"])
    assert out.kind == "counterexample"
    cex = out.result
    assert cex.args == (f(b, a),)
    assert cex.verified and any("holds: False" in line for line in cex.transcript)
    assert h_member(fol, "q", cex.args) and not h_member(fol, "p", cex.args)


def test_deterministic(fol):
    one, two = prove(fol, "p", ["q"]).result, prove(fol, "p", ["q"]).result
    assert [(n.rule, str(n.sequent), n.children, n.backlink) for n in one.nodes] == [
        (n.rule, str(n.sequent), n.children, n.backlink) for n in two.nodes
    ]


def test_reflexive_and_multi_rhs(fol):
    assert prove(fol, "q", ["q"]).kind == "proof"
    assert prove(fol, "p1", ["q1", "q2"]).kind == "proof"
    assert prove(fol, "q1", ["p1"]).kind == "proof"
    assert prove(fol, "q2", ["p1"]).kind == "counterexample"


@pytest.mark.parametrize("lhs, rhs", [("lsp", ["lshp"]), ("lshp", ["lsp"]), ("lsp", ["lse", "lso"]), ("lso", ["lsp"])])
def test_list_segment_proofs(sl, lhs, rhs):
    out = prove(sl, lhs, rhs)
    assert out.kind == "proof"
    assert out.result.normalized
    assert all_violations(out.result.nodes, Strategy()) == []


def test_list_segment_counterexamples(sl):
    empty = prove(sl, "lse", ["lsp"]).result
    assert empty.verified and empty.heap == Heap()
    two = prove(sl, "lsp", ["lso"]).result
    assert isinstance(two, Counterexample) and two.verified
    assert len(two.heap) == 2
    assert sl_member(sl, "lsp", two.args, two.heap) is not None
    assert sl_member(sl, "lso", two.args, two.heap) is None


def test_abandoned_normalisation_falls_back(dangling):
    out = prove(dangling, "r", ["r"])
    assert out.kind == "proof"
    assert any("skipped" in n for n in out.notes)


def test_strategy_can_block_the_search(fol):
    out = prove(fol, "p", ["q"], strategy="AX")
    assert isinstance(out.result, ResourceExhausted)
    assert "strategy" in out.result.limit


@pytest.mark.parametrize("limits, name", [(Limits(max_nodes=3), "nodes"), (Limits(max_depth=2), "depth")])
def test_limits(fol, limits, name):
    out = prove(fol, "p", ["q"], limits=limits)
    assert out.kind == "exhausted"
    assert out.result.limit == name


def test_limits_from_environment(monkeypatch):
    monkeypatch.setenv("INDESCENT_LIMITS", "nodes=7,depth=9,time=1.5,split=8")
    lim = Limits.from_env()
    assert (lim.max_nodes, lim.max_depth, lim.max_seconds, lim.max_split) == (7, 9, 1.5, 8)
    monkeypatch.setenv("INDESCENT_LIMITS", "bogus=1")
    with pytest.raises(ValueError):
        Limits.from_env()
    monkeypatch.delenv("INDESCENT_LIMITS")
    assert Limits.from_env() == Limits()


def test_prover_reads_environment_limits(fol, monkeypatch):
    monkeypatch.setenv("INDESCENT_LIMITS", "nodes=2")
    assert Prover(fol).prove("p", ["q"]).kind == "exhausted"


def test_bad_query(fol):
    with pytest.raises(ValueError):
        prove(fol, "p", ["nope"])


def test_proof_leaves_are_closed(fol, sl):
    for system, lhs, rhs in [(fol, "p", ["q"]), (sl, "lshp", ["lsp"])]:
        proof = prove(system, lhs, rhs).result
        assert isinstance(proof, Proof)
        for n in proof.nodes:
            if n.rule == "ID":
                assert n.backlink is not None and n.backlink < n.id
                assert not n.children


def test_render_shows_backlinks(fol):
    proof = prove(fol, "p", ("q",)).result
    lines = proof.render().splitlines()
    assert len(lines) == proof.size()
    assert lines[0].startswith("0 [LU] p(x) ⊢ q(x)")
    ids = [n for n in proof.nodes if n.rule == "ID"]
    assert ids and all(f"[ID -> {n.backlink}]" in proof.render() for n in ids)
