import copy
import json

import pytest

from indescent import check_certificate, check_proof, parse_system, proof_to_certificate, prove
from indescent.certs import (
    FORMAT,
    DigestMismatch,
    Invalid,
    Valid,
    certificate_mutations,
    dumps,
    loads,
    system_digest,
)

GOLDEN = [("fol", "p", ["q"]), ("sl", "lsp", ["lshp"]), ("sl", "lshp", ["lsp"])]


@pytest.fixture(scope="module")
def golden(fol, sl):
    systems = {"fol": fol, "sl": sl}
    out = []
    for name, lhs, rhs in GOLDEN:
        system = systems[name]
        proof = prove(system, lhs, rhs).result
        out.append((system, proof_to_certificate(proof, system)))
    return out


def test_roundtrip(golden):
    for system, cert in golden:
        assert cert["format"] == FORMAT
        assert cert["system_digest"] == system_digest(system)
        again = loads(dumps(cert))
        assert again == cert
        assert isinstance(check_certificate(system, again), Valid)


def test_check_proof_directly(fol):
    assert isinstance(check_proof(fol, prove(fol, "p", ["q"]).result), Valid)


def test_serialisation_is_stable(fol):
    one = dumps(proof_to_certificate(prove(fol, "p", ["q"]).result, fol))
    two = dumps(proof_to_certificate(prove(fol, "p", ["q"]).result, fol))
    assert one == two
    assert json.loads(one)["nodes"][0]["sequent"] == "p(x) ⊢ q(x)"


def test_wrong_system_is_a_digest_mismatch(golden, sl):
    _, cert = golden[0]
    assert isinstance(check_certificate(sl, cert), DigestMismatch)


def test_mutations_are_all_rejected(golden):
    for system, cert in golden:
        muts = certificate_mutations(cert)
        assert len(muts) >= 20
        kinds = {m.kind for m in muts}
        assert {"label", "child", "renaming", "literal", "backlink", "theta", "partition"} <= kinds
        for m in muts:
            res = check_certificate(system, m.cert)
            assert isinstance(res, Invalid), (m.kind, m.description)
            assert res.node is not None, (m.kind, m.description, res)


def test_retargeted_backlink(golden):
    system, cert = golden[0]
    bad = copy.deepcopy(cert)
    leaf = next(n for n in bad["nodes"] if n["rule"] == "ID")
    sibling = next(n["id"] for n in bad["nodes"] if n["id"] > leaf["id"] and n["rule"] == "LU")
    leaf["backlink"] = sibling
    res = check_certificate(system, bad)
    assert isinstance(res, Invalid) and res.node == leaf["id"]


def test_backlink_without_unfolding_is_rejected(fol):
    x = {"var": "x", "sort": "T"}
    form = {
        "constraint": None,
        "atoms": [{"pred": "q1", "args": [x]}],
        "rhs": [{"exists": [], "constraint": None, "atoms": [{"pred": "q1", "args": [x]}]}],
    }
    # SP with one atom and one member reproduces its own sequent
    cert = {
        "format": FORMAT,
        "theory": "herbrand",
        "system_digest": system_digest(fol),
        "query": {"lhs": "q1", "rhs": ["q1"]},
        "normalized": False,
        "strategy": "SP ID",
        "nodes": [
            {"id": 0, "sequent": "q1(x) ⊢ q1(x)", "form": form, "rule": "SP", "children": [1], "backlink": None,
             "witness": {"choice": [[[0], 0]]}},
            {"id": 1, "sequent": "q1(x) ⊢ q1(x)", "form": form, "rule": "ID", "children": [], "backlink": 0,
             "witness": {"theta": [[x, x]]}},
        ],
    }
    res = check_certificate(fol, cert)
    assert isinstance(res, Invalid)
    assert res.node == 1 and "LU" in res.reason


def test_header_problems(golden):
    system, cert = golden[0]
    for key, value in [("format", "other/1"), ("strategy", "(("), ("query", {"lhs": "p", "rhs": ["zz"]})]:
        bad = copy.deepcopy(cert)
        bad[key] = value
        assert isinstance(check_certificate(system, bad), Invalid)
    empty = copy.deepcopy(cert)
    empty["nodes"] = []
    assert isinstance(check_certificate(system, empty), Invalid)


def test_normalised_flag_is_checked(golden):
    system, cert = golden[1]
    assert cert["normalized"]
    bad = copy.deepcopy(cert)
    bad["normalized"] = False
    assert isinstance(check_certificate(system, bad), Invalid)


def test_counterexample_queries_have_no_certificate(fol):
    out = prove(fol, "q", ["p"])
    assert out.kind == "counterexample"
    with pytest.raises(Exception):
        proof_to_certificate(out.result, fol)
