"""The eight acceptance criteria, each checked at its stated tolerance.

Every test records a single PASS/FAIL line, repeated in the pytest summary.
Proved and disproved instances from criteria 1, 2 and 4 are shared with
criteria 5 and 6 through module fixtures, so each search runs once.
"""

import random
import time

import pytest

from indescent import check_certificate, check_restrictions, parse_system, proof_to_certificate, prove
from indescent.certs import Invalid, Valid, certificate_mutations, dumps, loads
from indescent.heaps import PointsTo, SymbolicHeap
from indescent.herbrand import WitnessMode, WitnessSet, h_least_solution, h_member, h_witnesses, is_tuplewise, witness_keys
from indescent.nfta import Membership, antichain_inclusion, brute_force_inclusion, nfta_to_system, random_instance, run_sets
from indescent.proof.search import Counterexample, Proof
from indescent.proof.strategy import Strategy
from indescent.proof.structure import (
    backlink_violations,
    lu_path_violations,
    strategy_violations,
    structured_violations,
)
from indescent.restrictions import Fail, Pass, rule_pairs
from indescent.seplog import SLMembership, sh_entails, sh_entails_oracle, sh_enumerate
from indescent.terms import App, Var, apply, eq, neq, unify

FUZZ_SEEDS = range(200)


def timed(fn, *args, **kw):
    t = time.monotonic()
    out = fn(*args, **kw)
    return out, time.monotonic() - t


@pytest.fixture(scope="module")
def fol_runs(fol):
    return {q: timed(prove, fol, *q) for q in [("p", ("q",)), ("q", ("p",))]}


@pytest.fixture(scope="module")
def sl_runs(sl):
    return {q: timed(prove, sl, *q) for q in [("lsp", ("lshp",)), ("lshp", ("lsp",))]}


@pytest.fixture(scope="module")
def fuzz_runs():
    started = time.monotonic()
    runs = []
    for seed in FUZZ_SEEDS:
        inst = random_instance(seed, max_states=5, max_rank=2, max_symbols=4)
        system = nfta_to_system(inst.automaton)
        out = prove(system, inst.lhs, inst.rhs)
        ac = antichain_inclusion(inst.automaton, inst.lhs, inst.rhs)
        bf = brute_force_inclusion(inst.automaton, inst.lhs, inst.rhs, 4)
        runs.append((inst, system, out, ac, bf))
    return runs, time.monotonic() - started


def emitted_proofs(fol, sl, fol_runs, sl_runs, fuzz_runs):
    out = [(fol, q, o.result) for q, (o, _) in fol_runs.items() if o.kind == "proof"]
    out += [(sl, q, o.result) for q, (o, _) in sl_runs.items() if o.kind == "proof"]
    out += [(system, (inst.lhs, inst.rhs), o.result) for inst, system, o, _, _ in fuzz_runs[0] if o.kind == "proof"]
    return out


def test_criterion_1_fol_verdicts(fol, fol_runs, criterion):
    (pq, t_pq), (qp, t_qp) = fol_runs[("p", ("q",))], fol_runs[("q", ("p",))]
    ok = pq.kind == "proof" and qp.kind == "counterexample" and t_pq < 5 and t_qp < 5
    cert_ok = False
    if ok:
        cert = loads(dumps(proof_to_certificate(pq.result, fol)))
        cert_ok = isinstance(check_certificate(fol, cert), Valid)
        ok = cert_ok and qp.result.args == (App("f", (App("b"), App("a"))),)
    detail = (f"p⊨q {pq.kind} ({t_pq:.2f}s, certificate {'Valid' if cert_ok else 'not Valid'}); "
              f"q⊨p {qp.kind} {getattr(qp.result, 'render', lambda: '')()} ({t_qp:.2f}s)")
    assert criterion(1, ok, detail)


def test_criterion_2_sl_verdicts(sl, sl_runs, criterion):
    parts, ok = [], True
    for (lhs, rhs), (out, t) in sl_runs.items():
        ok &= out.kind == "proof" and t < 5
        parts.append(f"{lhs}⊨{rhs[0]} {out.kind} ({t:.2f}s)")
    assert criterion(2, ok, "; ".join(parts))


def test_criterion_3_restrictions(fol, sl, data_dir, criterion):
    started = time.monotonic()
    extra = "(rule (p (x)) (constraint (and (= x (f x1 x2)) (= x1 x2))) (subgoals ((p1 x1) (p2 x2))))"
    augmented = parse_system((data_dir / "fol_pq.sys").read_text() + extra)
    reports = [check_restrictions(s) for s in (fol, sl, augmented)]
    elapsed = time.monotonic() - started
    all_pass = all(isinstance(o.verdict, Pass) for r in reports[:2] for o in r.outcomes())
    filtering = isinstance(reports[2].non_filtering.verdict, Fail)
    ok = all_pass and filtering and elapsed < 10
    detail = (f"examples all Pass: {all_pass}; augmented non-filtering Fail: {filtering}; {elapsed:.2f}s")
    assert criterion(3, ok, detail)


def test_criterion_4_differential_fuzzing(fuzz_runs, criterion):
    runs, elapsed = fuzz_runs
    agree = 0
    for inst, _, out, ac, bf in runs:
        engine = {"proof": True, "counterexample": False}.get(out.kind)
        agree += engine is not None and engine == ac.included == bf.included
    included = sum(ac.included for _, _, _, ac, _ in runs)
    ok = len(runs) >= 200 and agree == len(runs) and elapsed < 120
    detail = f"{agree}/{len(runs)} instances agree ({included} included, {len(runs) - included} not); {elapsed:.1f}s"
    assert criterion(4, ok, detail)


def _herbrand_escapes(system, lhs, rhs, depth=4):
    sol = h_least_solution(system, depth).get(lhs, set())
    return [t for t in sol if not any(h_member(system, q, t, depth + 2) for q in rhs)]


def _nfta_escapes(inst):
    return [t for S, t in run_sets(inst.automaton, 4).items() if inst.lhs in S and not S & set(inst.rhs)]


def _sl_escapes(system, lhs, rhs):
    mem = SLMembership(system)
    return [(a, h) for a, h, _ in sh_enumerate(system, lhs, max_unfold=4)
            if not any(mem.member(q, a, h) is not None for q in rhs)]


def test_criterion_5_empirical_soundness(fol, sl, fol_runs, sl_runs, fuzz_runs, criterion):
    proved = escapes = disproved = bad_witness = 0
    for (lhs, rhs), (out, _) in fol_runs.items():
        if out.kind == "proof":
            proved += 1
            escapes += len(_herbrand_escapes(fol, lhs, rhs))
        else:
            disproved += 1
            t = out.result.args
            bad_witness += not (h_member(fol, lhs, t) and not any(h_member(fol, q, t) for q in rhs))
    for (lhs, rhs), (out, _) in sl_runs.items():
        proved += out.kind == "proof"
        escapes += len(_sl_escapes(sl, lhs, rhs))
    for inst, _, out, _, _ in fuzz_runs[0]:
        mem = Membership(inst.automaton)
        if out.kind == "proof":
            proved += 1
            escapes += len(_nfta_escapes(inst))
        elif isinstance(out.result, Counterexample):
            disproved += 1
            (t,) = out.result.args
            bad_witness += not (mem.accepts(inst.lhs, t) and not any(mem.accepts(q, t) for q in inst.rhs))
    ok = escapes == 0 and bad_witness == 0 and proved > 0 and disproved > 0
    detail = (f"{proved} proofs, {escapes} counterexamples found by enumeration; "
              f"{disproved} disproofs, {bad_witness} witnesses failing verification")
    assert criterion(5, ok, detail)


def test_criterion_6_structure(fol, sl, fol_runs, sl_runs, fuzz_runs, criterion):
    proofs = emitted_proofs(fol, sl, fol_runs, sl_runs, fuzz_runs)
    counts = {"strategy": 0, "backlink": 0, "lu-path": 0, "structured": 0}
    for _, _, proof in proofs:
        counts["strategy"] += len(strategy_violations(proof.nodes, Strategy(proof.strategy)))
        counts["backlink"] += len(backlink_violations(proof.nodes))
        counts["lu-path"] += len(lu_path_violations(proof.nodes))
        counts["structured"] += len(structured_violations(proof.nodes))
    ok = len(proofs) > 0 and not any(counts.values())
    detail = f"{len(proofs)} proofs; violations " + ", ".join(f"{k}={v}" for k, v in counts.items())
    assert criterion(6, ok, detail)


def test_criterion_7_mutations(fol, sl, fol_runs, sl_runs, criterion):
    golden = [(fol, fol_runs[("p", ("q",))][0].result)]
    golden += [(sl, out.result) for out, _ in sl_runs.values()]
    parts, ok = [], True
    for system, proof in golden:
        cert = proof_to_certificate(proof, system)
        muts = certificate_mutations(cert)
        rejected = 0
        for m in muts:
            res = check_certificate(system, m.cert)
            rejected += isinstance(res, Invalid) and res.node is not None
        ok &= len(muts) >= 20 and rejected == len(muts)
        parts.append(f"{rejected}/{len(muts)}")
    assert criterion(7, ok, "mutations rejected with a node: " + ", ".join(parts))


def _random_term(rng, d, leaves):
    if d == 0 or rng.random() < 0.3:
        return rng.choice(leaves)
    if rng.random() < 0.4:
        return App("g", (_random_term(rng, d - 1, leaves),))
    return App("f", (_random_term(rng, d - 1, leaves), _random_term(rng, d - 1, leaves)))


def _variant(rng, t, leaves):
    """Perturb t so that the pair (t, variant) is often but not always unifiable."""
    if isinstance(t, Var):
        return _random_term(rng, 1, leaves) if rng.random() < 0.5 else t
    if rng.random() < 0.2:
        return rng.choice(leaves[:4])
    return App(t.fun, tuple(_variant(rng, a, leaves) for a in t.args))


def _random_heap(rng, vs):
    pure = [(eq if rng.random() < 0.6 else neq)(rng.choice(vs), rng.choice(vs)) for _ in range(rng.randint(0, 2))]
    cells = [PointsTo(rng.choice(vs), (rng.choice(vs),)) for _ in range(rng.randint(0, 2))]
    return SymbolicHeap([l for l in pure if l.lhs != l.rhs], cells)


def test_criterion_8_theory_properties(fol, data_dir, criterion):
    started = time.monotonic()
    rng = random.Random(2024)
    T = [Var(n, "T") for n in ("x", "y", "z", "w")]
    leaves = T + [App("a"), App("b")]
    unify_bad = unifiable = 0
    for _ in range(1000):
        lhs = [_random_term(rng, 3, leaves) for _ in range(rng.randint(1, 3))]
        pairs = [(s, _variant(rng, s, leaves)) for s in lhs]
        theta = unify(pairs)
        if theta is None:
            continue
        unifiable += 1
        for s, t in pairs:
            unify_bad += apply(theta, s) != apply(theta, t)
            unify_bad += apply(theta, apply(theta, s)) != apply(theta, s)

    extra = parse_system((data_dir / "fol_pq.sys").read_text()
                         + "(pred r (T T)) (rule (r (x y)) (constraint (and (= x a) (= y a))))"
                         + "(pred s (T)) (rule (s (x)) (constraint (= x (f x1 x1))) (subgoals ((p1 x1))))"
                         + "(rule (s (x)) (constraint (= x (f y1 y2))) (subgoals ((r y1 y2))))"
                         + "(rule (s (x)) (constraint (= x (g y1))) (subgoals ((q1 y1))))")
    witness_bad = pairs_seen = 0
    for system in (fol, extra):
        for pr in rule_pairs(system):
            pairs_seen += 1
            flat = h_witnesses(pr.phi, pr.x_tuples, pr.psi, pr.y_tuples, system.signature)
            full = h_witnesses(pr.phi, pr.x_tuples, pr.psi, pr.y_tuples, system.signature, WitnessMode.SUBTERM_BOUNDED)
            restricted = WitnessSet(tuple(t for t in full if is_tuplewise(t, pr.x_tuples, pr.y_tuples)), True)
            witness_bad += witness_keys(flat, pr.phi) != witness_keys(restricted, pr.phi)

    L = [Var(n, "Loc") for n in ("x", "y", "z", "w")]
    sl_bad = 0
    for _ in range(500):
        phi, psi = _random_heap(rng, L), _random_heap(rng, L)
        sl_bad += sh_entails(phi, psi) != sh_entails_oracle(phi, psi, nlocs=4)
    elapsed = time.monotonic() - started
    ok = unify_bad == 0 and unifiable >= 300 and witness_bad == 0 and sl_bad == 0 and elapsed < 60
    detail = (f"unification violations {unify_bad} ({unifiable}/1000 instances unifiable); witness-set mismatches {witness_bad}/{pairs_seen} pairs; "
              f"sh-entails disagreements {sl_bad}/500; {elapsed:.1f}s")
    assert criterion(8, ok, detail)
