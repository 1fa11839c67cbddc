"""Proof certificates: a self-contained JSON record of a derivation, an
independent checker that replays every rule instance, and a mutation suite
that the checker must reject."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from types import SimpleNamespace
from typing import Optional, Union

from .herbrand import is_tuplewise
from .normalize import NormalizationAbandoned, emp_coverage, ne_name, normalize
from .parser import print_system
from .proof.rules import (
    NotApplicable,
    apply_and_r,
    apply_lu,
    apply_ru,
    check_ax_member,
    check_id,
    fresh_ok,
    rd_result,
    rd_witnesses,
    sp_shape,
)
from .proof.search import Proof
from .proof.sequent import dec_sequent, dec_subst, dec_term, enc_sequent, enc_subst
from .proof.strategy import Strategy, StrategyError
from .proof.structure import (
    backlink_violations,
    lu_path_violations,
    parents,
    strategy_violations,
    structured_violations,
)
from .proof.theory import TheoryOps, flat_injective
from .system import EntailmentQuery, InductiveSystem, ValidationError, validate_query
from .terms import Var, subst_key

FORMAT = "indescent-certificate/1"


def system_digest(system: InductiveSystem) -> str:
    return hashlib.sha256(print_system(system).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# serialisation


def _enc_witness(rule: Optional[str], w: dict) -> dict:
    if rule in ("LU", "RU"):
        key = "atom" if rule == "LU" else "member"
        return {key: w[key], "renamings": [enc_subst(r) for r in w["renamings"]]}
    if rule == "RD":
        part = [None if t is None else [enc_subst(x) for x in t] for t in w["partition"]]
        out = {"partition": part}
        if "chosen" in w:
            out["chosen"] = [None if t is None else [enc_subst(x) for x in t] for t in w["chosen"]]
        return out
    if rule == "AR":
        return {"member": w["member"], "atoms": list(w["atoms"])}
    if rule == "SP":
        return {"choice": [[list(f), i] for f, i in w["choice"]]}
    if rule == "AX":
        if w.get("unsat"):
            return {"unsat": True}
        return {"member": w["member"], "theta": enc_subst(w["theta"])}
    if rule == "ID":
        return {"theta": enc_subst(w["theta"])}
    return {}


def proof_to_certificate(proof: Proof, system: Optional[InductiveSystem] = None) -> dict:
    source = system or proof.source or proof.system
    nodes = []
    for n in proof.nodes:
        nodes.append({
            "id": n.id,
            "sequent": str(n.sequent),
            "form": enc_sequent(n.sequent),
            "rule": n.rule,
            "children": list(n.children),
            "backlink": n.backlink,
            "witness": _enc_witness(n.rule, n.witness),
        })
    return {
        "format": FORMAT,
        "theory": source.theory.value,
        "system_digest": system_digest(source),
        "query": {"lhs": proof.lhs, "rhs": list(proof.rhs)},
        "normalized": proof.normalized,
        "strategy": proof.strategy,
        "nodes": nodes,
    }


def dumps(cert: dict) -> str:
    return json.dumps(cert, indent=1, ensure_ascii=False) + "\n"


def loads(text: str) -> dict:
    return json.loads(text)


# ---------------------------------------------------------------------------
# checking


@dataclass(frozen=True)
class Valid:
    def __str__(self) -> str:
        return "valid"


@dataclass(frozen=True)
class Invalid:
    node: Optional[int]
    reason: str

    def __str__(self) -> str:
        where = "certificate" if self.node is None else f"node {self.node}"
        return f"invalid at {where}: {self.reason}"


@dataclass(frozen=True)
class DigestMismatch:
    expected: str
    found: str

    def __str__(self) -> str:
        return f"system digest mismatch: certificate has {self.found[:12]}…, system is {self.expected[:12]}…"


CheckResult = Union[Valid, Invalid, DigestMismatch]


class _Malformed(Exception):
    pass


def _dec_renamings(rs) -> list[dict[Var, Var]]:
    return [dec_subst(r) for r in rs]


def _dec_thetas(t):
    return None if t is None else [dec_subst(x) for x in t]


def _decode_nodes(raw: list) -> list[SimpleNamespace]:
    nodes = []
    for i, d in enumerate(raw):
        try:
            if d["id"] != i:
                raise _Malformed(f"node listed at position {i} has id {d['id']}")
            kids = d["children"]
            if not isinstance(kids, list):
                raise _Malformed("children must be a list")
            nodes.append(SimpleNamespace(
                id=i,
                text=d["sequent"],
                sequent=dec_sequent(d["form"]),
                rule=d["rule"],
                children=list(kids),
                backlink=d["backlink"],
                witness=d["witness"],
            ))
        except _Malformed as e:
            raise _Malformed(f"{i}|{e}") from None
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise _Malformed(f"{i}|cannot decode node: {e!r}") from None
    return nodes


def _keys(seqs) -> list:
    return [s.key() for s in seqs]


def _local(ops: TheoryOps, nodes, n) -> Optional[str]:
    s = n.sequent
    kids = [nodes[c].sequent for c in n.children]
    w = n.witness
    if n.text != str(s):
        return "rendered sequent does not match its structured form"
    if n.rule is None:
        return "open leaf"
    if n.rule == "LU":
        rens = _dec_renamings(w["renamings"])
        if not fresh_ok(s, rens):
            return "LU renaming is not fresh"
        got, _ = apply_lu(ops, s, w["atom"], renamings=rens)
        if _keys(got) != _keys(kids):
            return "LU premises differ from the unfolding"
        return None
    if n.rule == "RU":
        rens = _dec_renamings(w["renamings"])
        if not fresh_ok(s, rens):
            return "RU renaming is not fresh"
        got, _ = apply_ru(ops, s, w["member"], renamings=rens)
        if _keys([got]) != _keys(kids):
            return "RU premise differs from the unfolding"
        return None
    if n.rule == "RD":
        if len(kids) != 1:
            return "RD has exactly one premise"
        part = [_dec_thetas(t) for t in w["partition"]]
        chosen = [_dec_thetas(t) for t in w.get("chosen", w["partition"])]
        recomputed = rd_witnesses(ops, s)
        if len(part) != len(s.rhs) or len(chosen) != len(s.rhs):
            return "RD partition does not list every right member"
        x_tuples = [a.args for a in s.atoms]
        for j, (r, mine, ref, use) in enumerate(zip(s.rhs, part, recomputed, chosen)):
            if (mine is None) != (ref is None):
                return f"right member {j} is misclassified by the entailment partition"
            allowed = {subst_key(t) for t in mine or ()}
            for theta in use or ():
                if subst_key(theta) not in allowed:
                    return f"chosen witness for member {j} is not in its witness set"
            for theta in mine or ():
                if set(theta) != set(r.exvars) or not all(isinstance(v, Var) for v in theta.values()):
                    return f"witness for member {j} is not a flat map of its existentials"
                if not is_tuplewise(theta, x_tuples, [a.args for a in r.atoms]):
                    return f"witness for member {j} is not tuple-wise"
                psi = r.constraint.subst(theta) if r.constraint is not None else None
                if not ops.entails(s.constraint, psi):
                    return f"witness for member {j} is not entailed"
        got = rd_result(ops, s, chosen)
        if _keys([got]) != _keys(kids):
            return "RD premise differs from the reduction"
        return None
    if n.rule == "AR":
        i, j = w["atoms"]
        got = apply_and_r(s, w["member"], i, j)
        if _keys(got) != _keys(kids):
            return "∧R premises differ"
        return None
    if n.rule == "SP":
        shape = sp_shape(s)
        if shape is None:
            return "SP needs disjoint left tuples and covering conjunctions"
        table: dict[tuple, int] = {}
        for f, i in w["choice"]:
            f = tuple(f)
            if len(f) != shape.k or any(not 0 <= x < shape.n for x in f):
                return f"choice function {list(f)} is out of range"
            if not isinstance(i, int) or not 0 <= i < shape.n:
                return f"chosen index {i} for {list(f)} is out of range"
            if f in table:
                return f"choice function {list(f)} listed twice"
            table[f] = i
        for f in shape.choice_functions():
            if f not in table:
                return f"choice function {list(f)} is not covered"
        want: dict[tuple, object] = {}
        for f, i in table.items():
            seq = shape.antecedent(f, i)
            want.setdefault(seq.key(), seq)
        have = _keys(kids)
        if len(set(have)) != len(have) or set(have) != set(want):
            return "SP premises differ from the chosen antecedents"
        return None
    if n.rule == "AX":
        if kids:
            return "AX has no premises"
        if w.get("unsat"):
            return None if ops.unsat(s.constraint) else "left constraint is satisfiable"
        j = w["member"]
        theta = dec_subst(w["theta"])
        if not 0 <= j < len(s.rhs):
            return "AX member out of range"
        return None if check_ax_member(ops, s, s.rhs[j], theta) else "AX side condition fails"
    if n.rule == "ID":
        if kids:
            return "ID has no premises"
        b = n.backlink
        if not isinstance(b, int) or not 0 <= b < len(nodes):
            return f"backlink {b} is not a node"
        theta = dec_subst(w["theta"])
        if not flat_injective(theta):
            return "θ is not flat and injective"
        return check_id(nodes[b].sequent, s, theta)
    return f"unknown rule label {n.rule!r}"


def check_certificate(system: InductiveSystem, cert: dict) -> CheckResult:
    """Replay a certificate against a system. The first violation in node
    order is reported; problems outside any node carry node None."""
    try:
        if cert.get("format") != FORMAT:
            return Invalid(None, f"unknown format {cert.get('format')!r}")
        digest = system_digest(system)
        if cert.get("system_digest") != digest:
            return DigestMismatch(digest, str(cert.get("system_digest")))
        lhs, rhs = cert["query"]["lhs"], tuple(cert["query"]["rhs"])
        validate_query(system, EntailmentQuery(lhs, rhs))
        strategy = Strategy(cert["strategy"])
    except (KeyError, TypeError, AttributeError) as e:
        return Invalid(None, f"malformed header: {e!r}")
    except (ValidationError, StrategyError) as e:
        return Invalid(None, str(e))
    work, p, qs = system, lhs, list(rhs)
    if cert.get("normalized"):
        try:
            norm = normalize(system)
        except NormalizationAbandoned as e:
            return Invalid(None, f"emp absorption is not available: {e}")
        if norm is None:
            return Invalid(None, "system has no empty-heap models to absorb")
        if emp_coverage(norm.summaries, lhs, rhs, system.predicate(lhs).arity) is not None:
            return Invalid(None, "an empty-heap model of the left predicate is not covered")
        work, p = norm.system, ne_name(lhs)
        qs = [ne_name(q) for q in rhs if ne_name(q) in norm.system.predicates]
        if p not in work.predicates:
            return Valid() if not cert["nodes"] else Invalid(0, "left predicate has no non-empty models")
    try:
        nodes = _decode_nodes(cert["nodes"])
    except _Malformed as e:
        idx, _, msg = str(e).partition("|")
        return Invalid(int(idx), msg)
    except (KeyError, TypeError) as e:
        return Invalid(None, f"malformed node table: {e!r}")
    if not nodes:
        return Invalid(None, "empty derivation")
    root = nodes[0].sequent
    if not root.is_basic or root.atoms[0].pred != p or sorted(r.atoms[0].pred for r in root.rhs) != sorted(set(qs)):
        return Invalid(0, "root is not the query sequent")
    args = root.atoms[0].args
    if len(set(args)) != len(args) or tuple(v.sort for v in args) != work.predicate(p).sorts:
        return Invalid(0, "root arguments are not distinct variables of the right sorts")
    _, bad = parents(nodes)
    if bad:
        return Invalid(*bad)
    ops = TheoryOps(work)
    violations: list[tuple[int, int, str]] = []
    for n in nodes:
        try:
            why = _local(ops, nodes, n)
        except (NotApplicable, KeyError, IndexError, TypeError, ValueError, AttributeError) as e:
            why = f"cannot replay {n.rule}: {e!r}"
        if why:
            violations.append((n.id, 0, why))
            break
    for rank, check in enumerate((backlink_violations, lu_path_violations, structured_violations), 1):
        violations += [(nid, rank, why) for nid, why in check(nodes)]
    violations += [(nid, 4, why) for nid, why in strategy_violations(nodes, strategy)]
    if violations:
        nid, _, why = min(violations)
        return Invalid(nid, why)
    return Valid()


def check_proof(system: InductiveSystem, proof: Proof) -> CheckResult:
    return check_certificate(system, loads(dumps(proof_to_certificate(proof, system))))


# ---------------------------------------------------------------------------
# mutations


@dataclass(frozen=True)
class Mutation:
    kind: str
    node: int
    description: str
    cert: dict


_SWAP = {"LU": "RU", "RU": "LU", "RD": "AR", "AR": "RD", "SP": "RD", "AX": "ID", "ID": "AX"}


def _flip_first_literal(form: dict) -> bool:
    c = form.get("constraint")
    if not c:
        return False
    lits = c["pure"] if c["kind"] == "heap" else c["lits"]
    if not lits:
        return False
    lits[0]["pos"] = not lits[0]["pos"]
    return True


def certificate_mutations(cert: dict) -> list[Mutation]:
    """Single-point corruptions of a valid certificate, each of which the
    checker must reject at some node."""
    out: list[Mutation] = []
    raw = cert["nodes"]
    par: dict[int, int] = {c: n["id"] for n in raw for c in n["children"]}

    def ancestors(i: int) -> set[int]:
        acc = set()
        while i in par:
            i = par[i]
            acc.add(i)
        return acc

    def add(kind: str, node: int, desc: str, mutate) -> None:
        c = copy.deepcopy(cert)
        if mutate(c["nodes"][node]) is not False:
            out.append(Mutation(kind, node, desc, c))

    for n in raw:
        i, rule, w = n["id"], n["rule"], n["witness"]
        if rule in _SWAP:
            add("label", i, f"relabel {rule} as {_SWAP[rule]}", lambda d, r=_SWAP[rule]: d.__setitem__("rule", r))
        if rule in ("LU", "RU"):
            ren = next((r for r in w["renamings"] if r), None)
            if ren is not None:
                sort = ren[0][1]["sort"]
                used = [v for v in dec_sequent(n["form"]).free_vars() if v.sort == sort]
                if used:
                    target = sorted(used, key=lambda v: v.name)[0]

                    def clash(d, t=target):
                        first = next(r for r in d["witness"]["renamings"] if r)
                        first[0][1] = {"var": t.name, "sort": t.sort}

                    add("renaming", i, f"rename onto the existing variable {target}", clash)
        if rule in ("ID", "AX") and w.get("theta"):

            def bogus(d):
                d["witness"]["theta"][0][1] = {"var": "_bogus", "sort": d["witness"]["theta"][0][1]["sort"]}

            add("theta", i, "send one variable of θ to an unrelated variable", bogus)
        if rule == "ID":
            add("backlink", i, "backlink to the leaf itself", lambda d, j=i: d.__setitem__("backlink", j))
            others = [m["id"] for m in raw if m["id"] not in ancestors(i) and m["id"] != i]
            if others:
                add("backlink", i, f"backlink to non-ancestor {others[-1]}",
                    lambda d, j=others[-1]: d.__setitem__("backlink", j))
        if n["form"].get("constraint"):

            def flip(d):
                if not _flip_first_literal(d["form"]):
                    return False
                d["sequent"] = str(dec_sequent(d["form"]))

            add("literal", i, "flip the polarity of a constraint literal", flip)
        if n["children"]:
            add("child", i, "drop the last premise", lambda d: d["children"].pop())
        if rule == "SP":

            def out_of_range(d):
                d["witness"]["choice"][0][1] = len(dec_sequent(d["form"]).atoms)

            add("choice", i, "choose a component that does not exist", out_of_range)
            add("choice", i, "omit a choice function", lambda d: d["witness"]["choice"].pop())
        if rule == "RD" and any(t for t in w["partition"]):

            def unentail(d):
                j = next(k for k, t in enumerate(d["witness"]["partition"]) if t)
                d["witness"]["partition"][j] = None
                if "chosen" in d["witness"]:
                    d["witness"]["chosen"][j] = None

            add("partition", i, "declare an entailed member not entailed", unentail)
    return out


__all__ = [
    "CheckResult",
    "DigestMismatch",
    "FORMAT",
    "Invalid",
    "Mutation",
    "Valid",
    "certificate_mutations",
    "check_certificate",
    "check_proof",
    "dec_term",
    "dumps",
    "loads",
    "proof_to_certificate",
    "system_digest",
]
