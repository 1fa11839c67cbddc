"""Sequents, rule schemata, strategies and the proof search driver."""

from .search import Counterexample, DerivationNode, Limits, Proof, Prover, ResourceExhausted, SearchOutcome, prove
from .sequent import RForm, Sequent
from .strategy import DEFAULT_STRATEGY, Strategy, StrategyError

__all__ = [
    "Counterexample",
    "DEFAULT_STRATEGY",
    "DerivationNode",
    "Limits",
    "Proof",
    "Prover",
    "RForm",
    "ResourceExhausted",
    "SearchOutcome",
    "Sequent",
    "Strategy",
    "StrategyError",
    "prove",
]
