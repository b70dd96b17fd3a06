"""Termination of second-order algebraic functional systems via higher-order polynomial interpretations."""

from .core import AFS, Rule, Setting, Signature, TypeDeclaration, order_of, typecheck, validate
from .parse import parse_afs, parse_constraint_problem
from .prover import ProverConfig, orient, prove_rule_removal, render_proof
from .solve import SolverConfig

__version__ = "0.1.0"

__all__ = [
    "AFS",
    "ProverConfig",
    "Rule",
    "Setting",
    "Signature",
    "SolverConfig",
    "TypeDeclaration",
    "order_of",
    "orient",
    "parse_afs",
    "parse_constraint_problem",
    "prove_rule_removal",
    "render_proof",
    "typecheck",
    "validate",
]
