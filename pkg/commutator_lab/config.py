"""Tolerance and concurrency configuration for commutator-lab.

This module tracks the tolerances used by the numerical routines and the
number of worker threads used by parallel sweeps. Both are held in context
variables so concurrent callers can run with different settings.
"""

import os
from collections.abc import Iterator
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass

THREADS_ENV_VAR = "COMMUTATOR_LAB_THREADS"


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by every factorization.

    Attributes:
        rank_rel: Relative singular-value cutoff; singular values at or below
            ``rank_rel * sigma_max * n`` count as zero.
        residual_rel: Acceptance threshold for pipelines that go through a
            numerical decomposition (also the normality, nilpotency and
            near-traceless thresholds).
        norm_iter_rel: Relative convergence threshold of power iteration.
        exact_residual_rel: Acceptance threshold for exact-recurrence paths.
        max_norm_iterations: Iteration cap for power iteration.
    """

    rank_rel: float = 1e-10
    residual_rel: float = 1e-8
    norm_iter_rel: float = 1e-9
    exact_residual_rel: float = 1e-12
    max_norm_iterations: int = 1000

    def __post_init__(self) -> None:
        for name in ("rank_rel", "residual_rel", "norm_iter_rel", "exact_residual_rel"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie strictly between 0 and 1, got {value!r}")
        if self.max_norm_iterations < 1:
            raise ValueError("max_norm_iterations must be positive")


DEFAULT_TOLERANCES = Tolerances()

# Thread-safe context variables for the active settings
_current_tolerances: ContextVar[Tolerances | None] = ContextVar("current_tolerances", default=None)
_thread_count: ContextVar[int | None] = ContextVar("thread_count", default=None)


def set_tolerances(tol: Tolerances | None) -> None:
    """Set the active tolerances.

    Args:
        tol: Tolerances to use, or None to restore the defaults.
    """
    _current_tolerances.set(tol)


def get_tolerances() -> Tolerances:
    """Get the active tolerances (the defaults when none were set)."""
    tol = _current_tolerances.get()
    return DEFAULT_TOLERANCES if tol is None else tol


def resolve_tolerances(tol: Tolerances | None) -> Tolerances:
    """Return ``tol`` itself, or the active tolerances when it is None."""
    return get_tolerances() if tol is None else tol


@contextmanager
def tolerance_context(tol: Tolerances) -> Iterator[Tolerances]:
    """Temporarily activate ``tol`` for the enclosed block."""
    token = _current_tolerances.set(tol)
    try:
        yield tol
    finally:
        _current_tolerances.reset(token)


def set_thread_count(count: int | None) -> None:
    """Set the worker thread count for parallel sweeps, or None to clear."""
    if count is not None and count < 1:
        raise ValueError(f"thread count must be positive, got {count}")
    _thread_count.set(count)


def get_thread_count() -> int:
    """Get the worker thread count for parallel sweeps.

    Looks up an explicitly set count first. Without one, falls back to the
    ``COMMUTATOR_LAB_THREADS`` environment variable, and finally to
    ``min(4, os.cpu_count())``. Malformed or non-positive environment values
    are ignored (passthrough to the default).

    Returns:
        Number of worker threads, at least 1.
    """
    explicit = _thread_count.get()
    if explicit is not None:
        return explicit

    raw = os.environ.get(THREADS_ENV_VAR, "").strip()
    if raw.isdigit() and int(raw) > 0:
        return int(raw)

    return max(1, min(4, os.cpu_count() or 1))
