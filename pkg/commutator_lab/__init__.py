"""Commutator factorizations A = [B, C] of traceless complex matrices, with rearrangement certificates, tensor-leg operators and seeded verification suites."""

__version__ = "0.1.0"

from .config import (
    Tolerances,
    get_thread_count,
    get_tolerances,
    set_thread_count,
    set_tolerances,
    tolerance_context,
)
from .exceptions import CommutatorLabError
from .factorization import Factorization, Method
from .harness import SuiteConfig, VerificationReport, run_suite, verify
from .nilfact import factor_nilpotent, flag_decomposition, strict_triangular_factor
from .normalfact import factor_normal, realize_distribution
from .shoda import factor_traceless
from .steinitz import RearrangementCertificate, exhaustive_best_order, greedy_order, rearrange

__all__ = [
    "CommutatorLabError",
    "Factorization",
    "Method",
    "RearrangementCertificate",
    "SuiteConfig",
    "Tolerances",
    "VerificationReport",
    "exhaustive_best_order",
    "factor_nilpotent",
    "factor_normal",
    "factor_traceless",
    "flag_decomposition",
    "get_thread_count",
    "get_tolerances",
    "greedy_order",
    "realize_distribution",
    "rearrange",
    "run_suite",
    "set_thread_count",
    "set_tolerances",
    "strict_triangular_factor",
    "tolerance_context",
    "verify",
]
