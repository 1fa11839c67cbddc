"""Entailment checking for inductively defined predicates by infinite descent.

Systems are read from an s-expression format (:func:`parse_system`), proved
or refuted by :func:`prove`, and proofs are exported as certificates that
:func:`check_certificate` replays independently.
"""

from .certs import check_certificate, check_proof, proof_to_certificate
from .nfta import NFTA, antichain_inclusion, nfta_to_system, parse_nfta, random_nfta
from .parser import parse_system, print_system
from .proof.search import Counterexample, Limits, Proof, Prover, ResourceExhausted, SearchOutcome, prove
from .proof.strategy import DEFAULT_STRATEGY, Strategy
from .restrictions import RestrictionReport, check_restrictions
from .system import Atom, EntailmentQuery, InductiveSystem, PredicateRule, Theory

__version__ = "0.1.0"

__all__ = [
    "Atom",
    "Counterexample",
    "DEFAULT_STRATEGY",
    "EntailmentQuery",
    "InductiveSystem",
    "Limits",
    "NFTA",
    "PredicateRule",
    "Proof",
    "Prover",
    "ResourceExhausted",
    "RestrictionReport",
    "SearchOutcome",
    "Strategy",
    "Theory",
    "antichain_inclusion",
    "check_certificate",
    "check_proof",
    "check_restrictions",
    "nfta_to_system",
    "parse_nfta",
    "parse_system",
    "print_system",
    "proof_to_certificate",
    "prove",
    "random_nfta",
]
