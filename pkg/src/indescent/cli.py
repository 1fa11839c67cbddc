"""Command-line entry point: prove, check, restrictions, oracle, fuzz."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .certs import Valid, check_certificate, dumps, loads, proof_to_certificate
from .fuzz import run_campaign
from .nfta import antichain_inclusion, nfta_to_system, parse_nfta, system_to_nfta
from .parser import parse_system
from .proof.search import Counterexample, Limits, Proof, Prover, ResourceExhausted
from .proof.strategy import DEFAULT_STRATEGY, StrategyError, Strategy
from .restrictions import Fail, check_restrictions
from .system import EntailmentQuery, InductiveSystem, validate_query

EXIT_VALID, EXIT_DISPROVED, EXIT_UNKNOWN, EXIT_INPUT, EXIT_RESTRICTION = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


def load_system(path: str) -> InductiveSystem:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    try:
        if path.endswith(".nfta"):
            a, queries = parse_nfta(text)
            return nfta_to_system(a, queries)
        return parse_system(text)
    except ValueError as e:
        raise InputError(f"{path}: {e}") from None


def _queries(system: InductiveSystem, index: Optional[int], entails: Optional[str]) -> list[EntailmentQuery]:
    if entails:
        lhs, _, rhs = entails.partition(":")
        q = EntailmentQuery(lhs.strip(), tuple(x for x in rhs.replace(",", " ").split()))
        try:
            validate_query(system, q)
        except ValueError as e:
            raise InputError(str(e)) from None
        return [q]
    if not system.queries:
        raise InputError("the file declares no (entails …) query; pass --entails P:Q1,Q2")
    if index is None:
        return list(system.queries)
    if not 0 <= index < len(system.queries):
        raise InputError(f"query index {index} out of range (file has {len(system.queries)})")
    return [system.queries[index]]


def _limits(args) -> Limits:
    lim = Limits.from_env()
    if args.limits:
        import os

        old = os.environ.get("INDESCENT_LIMITS")
        os.environ["INDESCENT_LIMITS"] = args.limits
        try:
            lim = Limits.from_env()
        finally:
            if old is None:
                del os.environ["INDESCENT_LIMITS"]
            else:
                os.environ["INDESCENT_LIMITS"] = old
    if args.max_nodes is not None:
        lim.max_nodes = args.max_nodes
    if args.max_depth is not None:
        lim.max_depth = args.max_depth
    if args.timeout is not None:
        lim.max_seconds = args.timeout
    return lim


def _write(path: Optional[str], text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")


def _combine(codes: Sequence[int]) -> int:
    if EXIT_DISPROVED in codes:
        return EXIT_DISPROVED
    if EXIT_UNKNOWN in codes:
        return EXIT_UNKNOWN
    return EXIT_VALID


def cmd_prove(args) -> int:
    system = load_system(args.file)
    queries = _queries(system, args.query, args.entails)
    try:
        strategy = Strategy(args.strategy)
    except StrategyError as e:
        raise InputError(f"strategy: {e}") from None
    limits = _limits(args)
    report = check_restrictions(system)
    print("restrictions:")
    for line in report.render().splitlines():
        print("  " + line)
    if args.require_restrictions and report.any_fail:
        print("a restriction check failed; refusing to search")
        return EXIT_RESTRICTION
    prover = Prover(system, strategy, limits)
    codes, records = [], []
    for n, q in enumerate(queries):
        out = prover.prove(q.lhs, q.rhs)
        res = out.result
        rec: dict = {"query": str(q), "nodes": out.nodes_explored, "seconds": round(out.seconds, 3)}
        if isinstance(res, Proof):
            uses_id = any(node.rule == "ID" for node in res.nodes)
            cert = proof_to_certificate(res, system)
            target = args.cert if len(queries) == 1 or not args.cert else f"{args.cert}.{n}"
            _write(target, dumps(cert))
            if uses_id and isinstance(report.ranked.verdict, Fail):
                code, rec["result"] = EXIT_UNKNOWN, "proof-unjustified"
                print(f"{q}: proof found ({res.size()} nodes) but it uses backlinks and the system is not ranked")
            else:
                code, rec["result"] = EXIT_VALID, "valid"
                print(f"{q}: valid, proof with {res.size()} nodes" + (f", certificate {target}" if target else ""))
            rec["certificate"] = target
        elif isinstance(res, Counterexample):
            rec["counterexample"] = res.render()
            rec["transcript"] = res.transcript
            if res.verified:
                code, rec["result"] = EXIT_DISPROVED, "disproved"
                print(f"{q}: invalid, counterexample {res.render()}")
            elif res.args:
                code, rec["result"] = EXIT_UNKNOWN, "unverified"
                print(f"{q}: unknown, unverified candidate {res.render()}")
            else:
                code, rec["result"] = EXIT_UNKNOWN, "unverified"
                print(f"{q}: unknown, every branch failed but no model was found")
            for line in res.transcript:
                print("  " + line)
        else:
            assert isinstance(res, ResourceExhausted)
            code, rec["result"] = EXIT_UNKNOWN, "exhausted"
            rec["limit"] = res.limit
            print(f"{q}: unknown, search stopped ({res.limit}) {res.detail}".rstrip())
        for note in out.notes:
            print("  note: " + note)
        codes.append(code)
        records.append(rec)
    _write(args.json, json.dumps({"restrictions": report.to_dict(), "queries": records}, indent=1, ensure_ascii=False) + "\n")
    return _combine(codes)


def cmd_check(args) -> int:
    system = load_system(args.file)
    try:
        cert = loads(Path(args.proof).read_text(encoding="utf-8"))
    except OSError as e:
        raise InputError(f"cannot read {args.proof}: {e.strerror}") from None
    except ValueError as e:
        raise InputError(f"{args.proof}: not a certificate ({e})") from None
    if not isinstance(cert, dict):
        raise InputError(f"{args.proof}: not a certificate")
    res = check_certificate(system, cert)
    print(res)
    return EXIT_VALID if isinstance(res, Valid) else EXIT_UNKNOWN


def cmd_restrictions(args) -> int:
    system = load_system(args.file)
    report = check_restrictions(system)
    print(report.render())
    if args.verbose:
        for o in report.outcomes():
            for subject, v in o.details:
                print(f"  {o.name}: {subject}: {v}")
    _write(args.json, json.dumps(report.to_dict(), indent=1, ensure_ascii=False) + "\n")
    if report.any_fail:
        return EXIT_RESTRICTION
    return EXIT_VALID if report.all_pass else EXIT_UNKNOWN


def cmd_oracle(args) -> int:
    system = load_system(args.file)
    try:
        a = system_to_nfta(system)
    except ValueError as e:
        raise InputError(f"not an automaton: {e}") from None
    codes = []
    for q in _queries(system, args.query, args.entails):
        res = antichain_inclusion(a, q.lhs, q.rhs)
        if res.included:
            print(f"{q}: included ({len(res.explored)} pairs explored)")
            codes.append(EXIT_VALID)
        else:
            print(f"{q}: not included, witness {res.witness}")
            codes.append(EXIT_DISPROVED)
    return _combine(codes)


def cmd_fuzz(args) -> int:
    seeds = range(args.start, args.start + args.seeds)
    records = run_campaign(seeds, max_states=args.max_states, max_rank=args.max_rank,
                           max_symbols=args.max_symbols, depth=args.depth, limits=_limits(args))
    bad = [r for r in records if not r.agree]
    for r in records:
        if args.verbose or not r.agree:
            print(r.line())
    included = sum(r.engine == "included" for r in records)
    print(f"{len(records)} instances, {included} included, {len(records) - included} not, {len(bad)} disagreements")
    _write(args.json, json.dumps([r.to_dict() for r in records], indent=1, ensure_ascii=False) + "\n")
    return EXIT_VALID if not bad else EXIT_UNKNOWN


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="indescent", description="Entailment checking for inductive systems.")
    sub = ap.add_subparsers(dest="command", required=True)

    def query_flags(p):
        p.add_argument("--query", type=int, help="index of the (entails …) form to run (default: all)")
        p.add_argument("--entails", metavar="P:Q1,Q2", help="run this query instead of the file's")

    def limit_flags(p):
        p.add_argument("--limits", help="e.g. nodes=20000,depth=200,time=30 (overrides INDESCENT_LIMITS)")
        p.add_argument("--max-nodes", type=int)
        p.add_argument("--max-depth", type=int)
        p.add_argument("--timeout", type=float, help="seconds per query")

    p = sub.add_parser("prove", help="check restrictions, then search for a proof or counterexample")
    p.add_argument("file")
    query_flags(p)
    p.add_argument("--strategy", default=DEFAULT_STRATEGY, help="rule-label regex guiding the search")
    limit_flags(p)
    p.add_argument("--cert", help="write the certificate here")
    p.add_argument("--json", help="write a structured report here")
    p.add_argument("--require-restrictions", action="store_true", help="exit 4 if a restriction fails")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("check", help="replay a proof certificate")
    p.add_argument("file")
    p.add_argument("--proof", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("restrictions", help="report the four restriction checks")
    p.add_argument("file")
    p.add_argument("--json")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_restrictions)

    p = sub.add_parser("oracle", help="antichain inclusion for automata-shaped systems")
    p.add_argument("file")
    query_flags(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("fuzz", help="differential campaign on random automata")
    p.add_argument("--seeds", type=int, default=200)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--max-states", type=int, default=5)
    p.add_argument("--max-rank", type=int, default=2)
    p.add_argument("--max-symbols", type=int, default=4)
    p.add_argument("--depth", type=int, default=4, help="brute-force term depth")
    limit_flags(p)
    p.add_argument("--json")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_fuzz)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_VALID
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
