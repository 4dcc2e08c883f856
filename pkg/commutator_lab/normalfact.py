"""Single-commutator factorizations of traceless normal matrices.

In an eigenbasis where the eigenvalues are ordered with small prefix sums,
a traceless diagonal matrix ``diag(lambda)`` equals ``[S, S^* D]`` with ``S``
the upper shift and ``D`` the diagonal of partial sums. Since ``||S|| <= 1``,
the norm product is bounded by the prefix bound of the ordering. Replacing
``S`` by the cyclic shift gives a unitary first factor and realizes any
zero-sum value multiset as a commutator spectrum.
"""

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from commutator_lab.config import Tolerances, resolve_tolerances
from commutator_lab.exceptions import SumNotZero
from commutator_lab.factorization import Factorization, Method
from commutator_lab.matcore import (
    ComplexMatrix,
    center_trace,
    spectral_decomposition_normal,
)
from commutator_lab.steinitz import RearrangementCertificate, center_values, rearrange

logger = logging.getLogger(__name__)

# Spectra up to this size are ordered by exhaustive search
EXHAUSTIVE_LIMIT = 8


def shift_matrix(n: int) -> ComplexMatrix:
    """Upper shift: ones on the superdiagonal, nilpotent of index ``n``."""
    if n < 1:
        raise ValueError("n must be positive")
    return np.eye(n, k=1, dtype=np.complex128)


def cyclic_shift(n: int) -> ComplexMatrix:
    """Wraparound shift unitary: ``u[i, i+1] = 1`` and ``u[n-1, 0] = 1``."""
    if n < 1:
        raise ValueError("n must be positive")
    return np.roll(np.eye(n, dtype=np.complex128), 1, axis=1)


def partial_sum_diagonal(ordered: npt.ArrayLike) -> ComplexMatrix:
    """``diag(l1, l1 + l2, ..., l1 + ... + l_{n-1}, 0)`` for a zero-sum tuple.

    The last entry is set to 0 rather than computed.

    Raises:
        SumNotZero: ``ordered`` does not sum to zero.
    """
    values = center_values(ordered)
    if values.size == 0:
        raise ValueError("empty tuple")
    partial = np.cumsum(values)
    partial[-1] = 0
    return np.diag(partial)


def factor_normal(
    a: npt.ArrayLike,
    tol: Tolerances | None = None,
    exhaustive_limit: int = EXHAUSTIVE_LIMIT,
) -> Factorization:
    """Factor a traceless normal matrix as ``[b, c]`` with ``||b|| <= 1``.

    Args:
        a: Normal matrix with negligible trace (it is centered first).
        tol: Tolerances; the active ones when None.
        exhaustive_limit: Largest spectrum ordered by exhaustive search.

    Returns:
        A ``NormalShift`` factorization whose certificate bounds
        ``||c||`` by its ``prefix_max``.

    Raises:
        TraceNotZero: The trace is not negligible.
        NormalityViolation: ``a`` is not normal within tolerance.
    """
    tol = resolve_tolerances(tol)
    centered = center_trace(a, tol)
    n = centered.shape[0]
    if n == 1:
        zero = np.zeros((1, 1), dtype=np.complex128)
        return Factorization.from_pair(centered, zero, zero.copy(), Method.NORMAL_SHIFT)

    spectral = spectral_decomposition_normal(centered, tol)
    certificate = rearrange(spectral.values, exhaustive_limit=exhaustive_limit)
    logger.debug(
        "normal factorization n=%d: prefix ratio %.4f (%s)",
        n,
        certificate.ratio,
        certificate.bound_class.value,
    )
    unitary = spectral.unitary[:, list(certificate.permutation)]
    shift = shift_matrix(n)
    partial = partial_sum_diagonal(certificate.ordered_values)
    unitary_h = unitary.conj().T
    b = unitary @ shift @ unitary_h
    c = unitary @ (shift.conj().T @ partial) @ unitary_h
    return Factorization.from_pair(centered, b, c, Method.NORMAL_SHIFT, certificate)


def factor_diagonal_cyclic(values: npt.ArrayLike, exhaustive_limit: int = EXHAUSTIVE_LIMIT) -> Factorization:
    """Realize a zero-sum tuple as the diagonal of ``[U, U^* D]``.

    ``U`` is the cyclic shift and ``D`` the partial-sum diagonal of the
    rearranged tuple, so ``[U, U^* D] = D - U^* D U`` is the rearranged tuple
    on the diagonal. ``D`` is the finite function whose coboundary takes the
    given values, with sup-norm equal to the certificate's ``prefix_max``.

    Raises:
        SumNotZero: ``values`` does not sum to zero.
    """
    centered = center_values(values)
    if centered.size == 0:
        raise ValueError("empty tuple")
    certificate = rearrange(centered, exhaustive_limit=exhaustive_limit)
    ordered = certificate.ordered_values
    n = ordered.size
    u = cyclic_shift(n)
    c = u.conj().T @ partial_sum_diagonal(ordered)
    return Factorization.from_pair(np.diag(ordered), u, c, Method.CYCLIC_UNITARY, certificate)


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely supported probability measure on the complex plane."""

    atoms: tuple[complex, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.atoms or len(self.atoms) != len(self.weights):
            raise ValueError("atoms and weights must be non-empty and of equal length")
        if len(set(self.atoms)) != len(self.atoms):
            raise ValueError("atoms must be distinct")
        if any(not w > 0 for w in self.weights):
            raise ValueError("weights must be positive")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {sum(self.weights)!r}, not 1")

    @property
    def mean(self) -> complex:
        return complex(sum(w * z for z, w in zip(self.atoms, self.weights)))

    @property
    def max_modulus(self) -> float:
        return max(abs(z) for z in self.atoms)

    @property
    def is_centered(self) -> bool:
        return abs(self.mean) <= 1e-12 * max(1.0, self.max_modulus)

    @classmethod
    def centered_projection_measure(cls, n: int, k: int) -> "DiscreteMeasure":
        """Spectral distribution of ``p - tau(p)`` for a rank-``k`` projection in dimension ``n``."""
        if not 1 <= k < n:
            raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
        return cls(atoms=(1 - k / n, -k / n), weights=(k / n, 1 - k / n))


def largest_remainder_counts(weights: npt.ArrayLike, n: int) -> npt.NDArray[np.int64]:
    """Split ``n`` into integer counts proportional to ``weights``.

    Floors of ``n * w`` are topped up one at a time in order of decreasing
    fractional remainder; the lowest index wins ties.
    """
    scaled = n * np.asarray(weights, dtype=float)
    counts = np.floor(scaled).astype(np.int64)
    remainder = scaled - counts
    short = n - int(counts.sum())
    for index in np.argsort(-remainder, kind="stable")[:short]:
        counts[index] += 1
    return counts


def approximate_measure(mu: DiscreteMeasure, n: int) -> npt.NDArray[np.complex128]:
    """Zero-sum ``n``-tuple whose empirical measure approximates ``mu``.

    Atoms are repeated by largest-remainder counts, in atom order, then the
    tuple is mean-subtracted so it sums to zero exactly.

    Raises:
        SumNotZero: ``mu`` does not have mean zero.
        ValueError: ``n`` is smaller than the number of atoms.
    """
    if not mu.is_centered:
        raise SumNotZero(mu.mean, 1e-12 * max(1.0, mu.max_modulus))
    if n < len(mu.atoms):
        raise ValueError(f"n={n} is smaller than the number of atoms ({len(mu.atoms)})")
    counts = largest_remainder_counts(mu.weights, n)
    values = np.repeat(np.asarray(mu.atoms, dtype=np.complex128), counts)
    correction = values.mean()
    logger.debug("approximate_measure n=%d: mean correction %.3e", n, abs(correction))
    return values - correction


def centered_projection(n: int, k: int) -> ComplexMatrix:
    """``p - (k/n) I`` for the diagonal rank-``k`` projection ``p``."""
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    diagonal = np.full(n, -k / n, dtype=np.complex128)
    diagonal[:k] = 1 - k / n
    return np.diag(diagonal)


@dataclass(frozen=True, eq=False)
class DistributionRealization:
    """Finite-stage commutator realizing a discrete measure.

    Attributes:
        values: Zero-sum tuple approximating the measure.
        counts: Number of repeats of each atom.
        correction: Modulus of the mean correction applied to the tuple.
        factorization: Cyclic factorization with spectrum ``values``.
    """

    values: npt.NDArray[np.complex128]
    counts: npt.NDArray[np.int64]
    correction: float
    factorization: Factorization

    @property
    def certificate(self) -> RearrangementCertificate | None:
        return self.factorization.certificate


def realize_distribution(
    mu: DiscreteMeasure, n: int, exhaustive_limit: int = EXHAUSTIVE_LIMIT
) -> DistributionRealization:
    """Commutator ``[U, U^* D]`` whose spectral distribution approximates ``mu``."""
    values = approximate_measure(mu, n)
    counts = largest_remainder_counts(mu.weights, n)
    raw = np.repeat(np.asarray(mu.atoms, dtype=np.complex128), counts)
    return DistributionRealization(
        values=values,
        counts=counts,
        correction=float(abs(raw.mean())),
        factorization=factor_diagonal_cyclic(values, exhaustive_limit=exhaustive_limit),
    )


def centered_projection_factorization(n: int, k: int, tol: Tolerances | None = None) -> Factorization:
    """``factor_normal`` of ``centered_projection(n, k)``."""
    return factor_normal(centered_projection(n, k), tol)
