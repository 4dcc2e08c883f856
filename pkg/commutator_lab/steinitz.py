"""Prefix-sum balancing of zero-sum complex tuples.

A zero-sum tuple of complex numbers can always be ordered so that every
prefix sum has modulus at most ``sqrt(5)/2`` times the largest modulus in the
tuple (2 is the classical, easier constant). The orderings found here come
with a self-validating ``RearrangementCertificate``.

Permutations are 0-based tuples: ``perm[k]`` is the index of the input value
placed at position ``k``.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np
import numpy.typing as npt

from commutator_lab.exceptions import CapExceeded, CertificateViolation, SumNotZero

logger = logging.getLogger(__name__)

EXHAUSTIVE_CAP = 10
DEFAULT_RESTARTS = 32
BOUND_SLACK = 1e-12
ZERO_SUM_REL = 1e-12


class BoundClass(str, Enum):
    """Best prefix bound met by a certificate."""

    BANASZCZYK = "Banaszczyk"
    GRINBERG_SEVASTYANOV = "GrinbergSevastyanov"
    UNBOUNDED = "Unbounded"

    @property
    def constant(self) -> float:
        return {
            BoundClass.BANASZCZYK: math.sqrt(5) / 2,
            BoundClass.GRINBERG_SEVASTYANOV: 2.0,
            BoundClass.UNBOUNDED: math.inf,
        }[self]


def classify_bound(prefix: float, max_modulus: float) -> BoundClass:
    """Smallest bound class whose constant covers ``prefix``."""
    for bound in (BoundClass.BANASZCZYK, BoundClass.GRINBERG_SEVASTYANOV):
        if prefix <= bound.constant * max_modulus + BOUND_SLACK:
            return bound
    return BoundClass.UNBOUNDED


@dataclass(frozen=True)
class RearrangementCertificate:
    """An ordering of a zero-sum tuple together with its prefix bound.

    Attributes:
        values: The (centered) tuple the certificate is about.
        permutation: 0-based ordering of ``values``.
        prefix_max: Largest prefix-sum modulus under ``permutation``.
        max_modulus: Largest modulus in ``values``.
        bound_class: Best bound class met.
    """

    values: tuple[complex, ...]
    permutation: tuple[int, ...]
    prefix_max: float
    max_modulus: float
    bound_class: BoundClass

    @property
    def ratio(self) -> float:
        """``prefix_max / max_modulus`` (0 for the all-zero tuple)."""
        return 0.0 if self.max_modulus == 0 else self.prefix_max / self.max_modulus

    @property
    def ordered_values(self) -> npt.NDArray[np.complex128]:
        return np.asarray(self.values, dtype=np.complex128)[list(self.permutation)]

    def validate(self) -> None:
        """Recompute the stored data from ``(values, permutation)``.

        Raises:
            CertificateViolation: Any stored field disagrees with the
                recomputation.
        """
        recomputed = prefix_max(self.values, self.permutation)
        if abs(recomputed - self.prefix_max) > 1e-14 * max(1.0, self.max_modulus):
            raise CertificateViolation(
                f"stored prefix_max {self.prefix_max!r} differs from recomputed {recomputed!r}"
            )
        modulus = max_modulus(self.values)
        if abs(modulus - self.max_modulus) > 1e-14 * max(1.0, modulus):
            raise CertificateViolation(f"stored max_modulus {self.max_modulus!r} differs from {modulus!r}")
        if self.bound_class.constant * self.max_modulus + BOUND_SLACK < self.prefix_max:
            raise CertificateViolation(
                f"prefix_max {self.prefix_max:.6g} exceeds the {self.bound_class.value} bound"
            )

    def summary(self) -> dict[str, object]:
        """JSON-friendly digest used in verification reports."""
        return {
            "permutation": list(self.permutation),
            "prefix_max": self.prefix_max,
            "max_modulus": self.max_modulus,
            "bound_class": self.bound_class.value,
            "ratio": self.ratio,
        }


def center_values(values: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    """Enforce the zero-sum policy on ``values``.

    Tuples with ``|sum| <= 1e-12 * n * max_modulus`` are mean-subtracted;
    anything larger is rejected.

    Raises:
        SumNotZero: The sum is above the threshold.
    """
    arr = np.asarray(values, dtype=np.complex128).ravel()
    if arr.size == 0:
        return arr
    if not np.all(np.isfinite(arr)):
        raise ValueError("values must be finite")
    total = complex(arr.sum())
    threshold = ZERO_SUM_REL * arr.size * float(np.max(np.abs(arr)))
    if abs(total) > threshold:
        raise SumNotZero(total, threshold)
    if total != 0:
        arr = arr - total / arr.size
    return arr


def _check_permutation(perm: Sequence[int], n: int) -> list[int]:
    order = [int(i) for i in perm]
    if sorted(order) != list(range(n)):
        raise ValueError(f"{tuple(perm)!r} is not a permutation of 0..{n - 1}")
    return order


def prefix_max(values: npt.ArrayLike, perm: Sequence[int]) -> float:
    """Largest ``|values[perm[0]] + ... + values[perm[k]]|`` over all k.

    Raises:
        ValueError: ``perm`` is not a bijection on the indices of ``values``.
    """
    arr = np.asarray(values, dtype=np.complex128).ravel()
    order = _check_permutation(perm, arr.size)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(np.cumsum(arr[order]))))


def max_modulus(values: npt.ArrayLike) -> float:
    """Largest ``|v|`` over ``values`` (0 for an empty tuple)."""
    arr = np.asarray(values, dtype=np.complex128).ravel()
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def _certificate(values: npt.NDArray[np.complex128], perm: Sequence[int]) -> RearrangementCertificate:
    modulus = max_modulus(values)
    prefix = prefix_max(values, perm)
    return RearrangementCertificate(
        values=tuple(complex(v) for v in values),
        permutation=tuple(int(i) for i in perm),
        prefix_max=prefix,
        max_modulus=modulus,
        bound_class=classify_bound(prefix, modulus),
    )


def _greedy_pass(values: npt.NDArray[np.complex128], first: int | None = None) -> list[int]:
    """Append the unused value minimizing the new prefix modulus; lowest index wins ties."""
    unused = list(range(values.size))
    order: list[int] = []
    running = 0j
    if first is not None:
        unused.remove(first)
        order.append(first)
        running = values[first]
    while unused:
        candidates = np.abs(running + values[unused])
        pick = unused.pop(int(np.argmin(candidates)))
        order.append(pick)
        running += values[pick]
    return order


def exhaustive_best_order(values: npt.ArrayLike, cap: int = EXHAUSTIVE_CAP) -> RearrangementCertificate:
    """Globally optimal ordering by branch-and-bound.

    The greedy ordering seeds the incumbent. Branches whose running prefix
    maximum already reaches the incumbent are pruned, equal values are tried
    once per depth, and the search stops as soon as the incumbent meets the
    lower bound ``max_modulus / 2``.

    Raises:
        CapExceeded: More than ``cap`` values.
        SumNotZero: The tuple does not sum to zero.
    """
    arr = np.asarray(values, dtype=np.complex128).ravel()
    if arr.size > cap:
        raise CapExceeded(arr.size, cap)
    arr = center_values(arr)
    n = arr.size
    if n == 0:
        return _certificate(arr, ())

    best_perm = _greedy_pass(arr)
    best_value = prefix_max(arr, best_perm)
    lower = float(np.max(np.abs(arr))) / 2
    used = [False] * n
    order: list[int] = []
    visited = 0

    def search(partial: complex, running: float) -> bool:
        nonlocal best_perm, best_value, visited
        visited += 1
        if len(order) == n:
            if running < best_value:
                best_perm, best_value = list(order), running
            return best_value <= lower
        tried: set[complex] = set()
        for i in range(n):
            value = complex(arr[i])
            if used[i] or value in tried:
                continue
            tried.add(value)
            nxt = partial + value
            bound = max(running, abs(nxt))
            if bound >= best_value:
                continue
            used[i] = True
            order.append(i)
            done = search(nxt, bound)
            order.pop()
            used[i] = False
            if done:
                return True
        return False

    if best_value > lower:
        search(0j, 0.0)
    logger.debug("exhaustive search over %d values visited %d nodes", n, visited)
    return _certificate(arr, best_perm)


def greedy_order(
    values: npt.ArrayLike,
    restarts: int = DEFAULT_RESTARTS,
    cap: int = EXHAUSTIVE_CAP,
    seed: int = 0,
) -> RearrangementCertificate:
    """Greedy ordering with randomized restarts and an exhaustive fallback.

    A plain greedy pass is tried first. When its ratio exceeds 2, up to
    ``restarts`` randomized passes (random first value, then greedy) are run
    and the best is kept, the lowest restart index winning ties. If the
    ratio is still above 2, tuples within ``cap`` fall back to the
    exhaustive search; longer ones return the best order found, classed
    ``Unbounded``.
    """
    arr = center_values(values)
    if arr.size == 0:
        return _certificate(arr, ())

    best = _certificate(arr, _greedy_pass(arr))
    if best.bound_class is not BoundClass.UNBOUNDED:
        return best

    for restart in range(restarts):
        rng = np.random.default_rng([seed, restart])
        candidate = _certificate(arr, _greedy_pass(arr, first=int(rng.integers(arr.size))))
        if candidate.prefix_max < best.prefix_max:
            best = candidate
        if best.bound_class is not BoundClass.UNBOUNDED:
            logger.debug("greedy restart %d reached ratio %.4f", restart, best.ratio)
            return best

    if arr.size <= cap:
        logger.debug("greedy ratio %.4f above 2; falling back to exhaustive search", best.ratio)
        return exhaustive_best_order(arr, cap=cap)
    logger.warning("no ordering within twice the max modulus found for %d values", arr.size)
    return best


def rearrange(values: npt.ArrayLike, exhaustive_limit: int = 8) -> RearrangementCertificate:
    """Exhaustive ordering up to ``exhaustive_limit`` values, greedy beyond."""
    arr = np.asarray(values, dtype=np.complex128).ravel()
    if arr.size <= exhaustive_limit:
        return exhaustive_best_order(arr, cap=max(exhaustive_limit, EXHAUSTIVE_CAP))
    return greedy_order(arr)
