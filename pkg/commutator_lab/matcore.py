"""Dense complex matrix primitives.

Arithmetic, norms, spectral factorizations and numerical-rank helpers used by
every factorization module. Matrices are plain ``numpy`` arrays of dtype
``complex128``; nothing here keeps state.
"""

import logging
from dataclasses import dataclass
from typing import TypeAlias

import numpy as np
import numpy.typing as npt
import scipy.linalg
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from commutator_lab.config import Tolerances, resolve_tolerances
from commutator_lab.exceptions import (
    DimensionMismatch,
    NilpotencyViolation,
    NonConvergence,
    NormalityViolation,
    RankDegeneracy,
    TraceNotZero,
)

logger = logging.getLogger(__name__)

ComplexMatrix: TypeAlias = npt.NDArray[np.complex128]
Seed: TypeAlias = int | np.random.SeedSequence | np.random.Generator | None

# Largest dimension for which operator_norm uses a dense SVD
DENSE_NORM_LIMIT = 4096


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Unitary diagonalization ``x = unitary @ diag(values) @ unitary^*``."""

    unitary: ComplexMatrix
    values: npt.NDArray[np.complex128]

    def reconstruct(self) -> ComplexMatrix:
        return (self.unitary * self.values) @ self.unitary.conj().T


def as_matrix(x: npt.ArrayLike) -> ComplexMatrix:
    """Validate ``x`` as a finite square matrix and return a complex copy."""
    arr = np.array(x, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has NaN or infinite entries")
    return arr


def _check_same_shape(x: ComplexMatrix, y: ComplexMatrix) -> None:
    if x.shape != y.shape:
        raise DimensionMismatch(f"dimension mismatch: {x.shape} vs {y.shape}")


def commutator(x: npt.ArrayLike, y: npt.ArrayLike) -> ComplexMatrix:
    """Return ``xy - yx``."""
    x, y = as_matrix(x), as_matrix(y)
    _check_same_shape(x, y)
    return x @ y - y @ x


def normalized_trace(x: npt.ArrayLike) -> complex:
    """Trace divided by the dimension, so the identity has trace 1."""
    x = as_matrix(x)
    return complex(np.trace(x) / x.shape[0])


def l2_norm(x: npt.ArrayLike) -> float:
    """Norm induced by the normalized trace, ``tr_n(x^* x)^(1/2)``."""
    x = as_matrix(x)
    return float(np.linalg.norm(x) / np.sqrt(x.shape[0]))


def power_iteration_norm(
    op: LinearOperator | npt.ArrayLike,
    *,
    rel_tol: float,
    max_iter: int = 1000,
    seed: Seed = 0,
    start: npt.ArrayLike | None = None,
    atol: float = 0.0,
) -> float:
    """Estimate the operator norm of ``op`` by power iteration on ``op^* op``.

    The estimates ``||op v_k||`` form a nondecreasing sequence, so the result
    is a lower bound of the true norm at every stage; it is at least
    ``|<op v_0, v_0>|`` for the (normalized) start vector.

    Args:
        op: Matrix or ``LinearOperator`` providing ``matvec`` and ``rmatvec``.
        rel_tol: Stop when successive estimates differ by at most this
            fraction of the current estimate.
        max_iter: Iteration cap.
        seed: Seed of the random start vector when ``start`` is None.
        start: Explicit start vector.
        atol: Absolute floor; estimates at or below it are returned at once.

    Raises:
        NonConvergence: The cap was reached; carries the best estimate.
    """
    op = aslinearoperator(op)
    dim = op.shape[1]
    if start is None:
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    else:
        v = np.array(start, dtype=np.complex128).reshape(dim)
    length = np.linalg.norm(v)
    if length == 0:
        raise ValueError("power iteration start vector is zero")
    v = v / length

    estimate = 0.0
    for iteration in range(max_iter):
        w = op.matvec(v)
        current = float(np.linalg.norm(w))
        if current <= atol:
            return max(estimate, current)
        if iteration > 0 and abs(current - estimate) <= max(rel_tol * current, atol):
            logger.debug("power iteration converged after %d steps: %.12g", iteration + 1, current)
            return max(estimate, current)
        estimate = max(estimate, current)
        x = op.rmatvec(w)
        length = np.linalg.norm(x)
        if length == 0:
            return estimate
        v = x / length
    raise NonConvergence(estimate, max_iter, "power iteration did not converge")


def operator_norm(x: npt.ArrayLike, tol: Tolerances | None = None) -> float:
    """Largest singular value.

    Dense SVD up to ``DENSE_NORM_LIMIT``; seeded power iteration beyond.
    """
    x = as_matrix(x)
    if x.shape[0] <= DENSE_NORM_LIMIT:
        return float(np.linalg.norm(x, 2))
    tol = resolve_tolerances(tol)
    return power_iteration_norm(x, rel_tol=tol.norm_iter_rel, max_iter=tol.max_norm_iterations)


def normality_defect(x: npt.ArrayLike) -> float:
    """Operator norm of ``x^* x - x x^*``."""
    x = as_matrix(x)
    xh = x.conj().T
    return operator_norm(xh @ x - x @ xh)


def center_trace(x: npt.ArrayLike, tol: Tolerances | None = None) -> ComplexMatrix:
    """Subtract ``tau(x) I`` when the trace is negligible, else reject.

    Raises:
        TraceNotZero: ``|tau(x)| > residual_rel * ||x||``.
    """
    x = as_matrix(x)
    tol = resolve_tolerances(tol)
    tau = normalized_trace(x)
    threshold = tol.residual_rel * operator_norm(x)
    if abs(tau) > threshold:
        raise TraceNotZero(tau, threshold)
    if tau != 0:
        logger.debug("removing negligible trace %s", tau)
        x = x - tau * np.eye(x.shape[0])
    return x


def spectral_decomposition_normal(x: npt.ArrayLike, tol: Tolerances | None = None) -> SpectralData:
    """Unitarily diagonalize a normal matrix.

    Eigenvalues come back sorted lexicographically descending in (Re, Im).

    Raises:
        NormalityViolation: ``||x^*x - xx^*|| > residual_rel * ||x||^2`` or the
            reconstruction residual exceeds ``residual_rel * ||x||``.
    """
    x = as_matrix(x)
    tol = resolve_tolerances(tol)
    n = x.shape[0]
    scale = operator_norm(x)
    defect = normality_defect(x)
    if defect > tol.residual_rel * scale**2:
        raise NormalityViolation(defect, tol.residual_rel * scale**2)

    diagonal = np.diag(x)
    if np.array_equal(x, np.diag(diagonal)):
        unitary, values = np.eye(n, dtype=np.complex128), diagonal.copy()
    elif np.array_equal(x, x.conj().T):
        real_values, unitary = scipy.linalg.eigh(x)
        values = real_values.astype(np.complex128)
        unitary = unitary.astype(np.complex128)
    else:
        upper, unitary = scipy.linalg.schur(x, output="complex")
        values = np.diag(upper).copy()

    order = np.lexsort((-values.imag, -values.real))
    result = SpectralData(unitary=unitary[:, order], values=values[order])

    residual = operator_norm(result.reconstruct() - x)
    if residual > tol.residual_rel * scale:
        raise NormalityViolation(residual, tol.residual_rel * scale)
    return result


def nilpotency_index(t: npt.ArrayLike, tol: Tolerances | None = None) -> int | None:
    """Smallest k with ``||(t/||t||)^k|| <= residual_rel``, or None."""
    t = as_matrix(t)
    tol = resolve_tolerances(tol)
    scale = operator_norm(t)
    if scale == 0:
        return 1
    unit = t / scale
    power = unit
    for k in range(1, t.shape[0] + 1):
        if operator_norm(power) <= tol.residual_rel:
            return k
        power = power @ unit
    return None


def _largest_eigenvalue(t: ComplexMatrix) -> complex:
    eigenvalues = scipy.linalg.eigvals(t)
    return complex(eigenvalues[np.argmax(np.abs(eigenvalues))])


def require_nilpotent(t: ComplexMatrix, tol: Tolerances) -> int:
    """Return the nilpotency index of ``t`` or raise NilpotencyViolation."""
    index = nilpotency_index(t, tol)
    if index is None:
        raise NilpotencyViolation(_largest_eigenvalue(t))
    return index


def kernel_staircase(
    t: npt.ArrayLike, cutoff: float, min_gap: float = 0.0
) -> list[ComplexMatrix]:
    """Orthonormal bases of ``ker T`` and ``ker T^j ⊖ ker T^(j-1)`` for ``j >= 2``.

    Each step takes the kernel of ``T`` followed by the projection off the
    kernels already found, so every rank decision is made on ``T`` itself
    rather than on a deflated remainder.

    Raises:
        RankDegeneracy: A kernel dimension has a singular value gap ratio
            below ``min_gap``.
        NilpotencyViolation: The chain stops growing before it spans the
            space.
    """
    t = np.asarray(t, dtype=np.complex128)
    n = t.shape[0]
    known = np.zeros((n, 0), dtype=np.complex128)
    chain: list[ComplexMatrix] = []
    while known.shape[1] < n:
        residual_map = t - known @ (known.conj().T @ t)
        kernel, gap = kernel_with_gap(residual_map, cutoff)
        if gap < min_gap:
            raise RankDegeneracy(gap, f"ambiguous rank of ker T^{len(chain) + 1}")
        fresh = kernel - known @ (known.conj().T @ kernel)
        u, singular, _ = scipy.linalg.svd(fresh, full_matrices=False)
        grow = int(np.count_nonzero(singular > 0.5))
        if grow == 0:
            raise NilpotencyViolation(0j, f"kernel chain stalled at dimension {known.shape[1]} of {n}")
        logger.debug("kernel step %d adds %d dimensions (gap %.3g)", len(chain) + 1, grow, gap)
        chain.append(u[:, :grow])
        known = np.column_stack([known, u[:, :grow]])
    return chain


def schur_strict_triangularize(
    t: npt.ArrayLike, tol: Tolerances | None = None
) -> tuple[ComplexMatrix, ComplexMatrix]:
    """Unitarily triangularize a nilpotent matrix.

    The basis is the kernel staircase of ``t``: ``t`` maps ``ker T^j`` into
    ``ker T^(j-1)``, so in a basis listing ``ker T`` first and each later
    increment after it, ``t`` is strictly upper triangular. Strictly upper
    triangular input is returned unchanged.

    Returns:
        ``(unitary, upper)`` with ``unitary^* t unitary ~= upper`` and ``upper``
        exactly zero on and below the diagonal.

    Raises:
        NilpotencyViolation: ``t`` fails the power criterion, or the
            triangularization leaves a lower part above tolerance.
    """
    t = as_matrix(t)
    tol = resolve_tolerances(tol)
    n = t.shape[0]
    require_nilpotent(t, tol)
    scale = operator_norm(t)
    if not np.any(np.tril(t)):
        return np.eye(n, dtype=np.complex128), t.copy()

    unitary = np.column_stack(kernel_staircase(t, tol.rank_rel * scale * n))
    work = unitary.conj().T @ t @ unitary
    lower = float(np.linalg.norm(np.tril(work)))
    if lower > tol.residual_rel * scale:
        raise NilpotencyViolation(
            _largest_eigenvalue(t),
            f"triangularization left a lower part of norm {lower:.3e}",
        )
    return unitary, np.triu(work, 1)


def kernel_with_gap(
    x: npt.ArrayLike, cutoff: float
) -> tuple[ComplexMatrix, float]:
    """Orthonormal kernel basis for singular values ``<= cutoff``.

    Returns:
        ``(basis, gap)`` where ``gap`` is the ratio of the smallest kept to the
        largest discarded singular value (``inf`` when one side is empty or
        the discarded values are exactly zero).
    """
    x = np.asarray(x, dtype=np.complex128)
    _, singular, vh = scipy.linalg.svd(x)
    rank = int(np.count_nonzero(singular > cutoff))
    return vh[rank:].conj().T, _gap_ratio(singular, rank)


def range_with_gap(
    x: npt.ArrayLike, cutoff: float
) -> tuple[ComplexMatrix, float]:
    """Orthonormal basis of the numerical range of ``x`` (columns)."""
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[1] == 0:
        return np.zeros((x.shape[0], 0), dtype=np.complex128), float("inf")
    u, singular, _ = scipy.linalg.svd(x, full_matrices=False)
    rank = int(np.count_nonzero(singular > cutoff))
    return u[:, :rank], _gap_ratio(singular, rank)


def _gap_ratio(singular: npt.NDArray[np.float64], rank: int) -> float:
    if rank == 0 or rank == singular.shape[0]:
        return float("inf")
    dropped = singular[rank]
    if dropped == 0:
        return float("inf")
    return float(singular[rank - 1] / dropped)


def numerical_kernel(x: npt.ArrayLike, tol: Tolerances | None = None) -> ComplexMatrix:
    """Orthonormal basis (columns) of the numerical kernel of ``x``.

    Singular values at or below ``rank_rel * sigma_max * n`` count as zero.
    The kernel of the shift ``J_n`` (ones on the superdiagonal) is spanned by
    ``e_1``.
    """
    x = as_matrix(x)
    tol = resolve_tolerances(tol)
    n = x.shape[0]
    sigma_max = operator_norm(x)
    if sigma_max == 0:
        return np.eye(n, dtype=np.complex128)
    basis, _ = kernel_with_gap(x, tol.rank_rel * sigma_max * n)
    return basis


def _rng(seed: Seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _complex_gaussian(rng: np.random.Generator, shape: int | tuple[int, ...]) -> npt.NDArray[np.complex128]:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def haar_unitary(n: int, seed: Seed = None) -> ComplexMatrix:
    """Haar-distributed unitary (QR of a Ginibre matrix with phase fix)."""
    if n < 1:
        raise ValueError("n must be positive")
    q, r = np.linalg.qr(_complex_gaussian(_rng(seed), (n, n)))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_normal_traceless(n: int, seed: Seed = None) -> ComplexMatrix:
    """``U diag(lambda) U^*`` with Haar ``U`` and mean-subtracted ``lambda``."""
    rng = _rng(seed)
    values = _complex_gaussian(rng, n)
    values -= values.mean()
    u = haar_unitary(n, rng)
    return (u * values) @ u.conj().T


def random_strictly_upper(n: int, seed: Seed = None) -> ComplexMatrix:
    """Strictly upper triangular matrix with a dominant superdiagonal.

    Superdiagonal entries have modulus in ``[1, 2]``; an entry ``d >= 2``
    places above the diagonal has modulus at most ``0.25 / d**2``. Every
    ``ker T^j`` then has a singular value gap of order one, at any size.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = _rng(seed)
    phases = np.exp(2j * np.pi * rng.random((n, n)))
    offset = np.arange(n)[None, :] - np.arange(n)[:, None]
    scale = np.where(offset >= 2, 0.25 / np.maximum(offset, 1) ** 2, 0.0)
    upper = phases * rng.random((n, n)) * scale
    idx = np.arange(n - 1)
    upper[idx, idx + 1] = phases[idx, idx + 1] * (1 + rng.random(n - 1))
    return upper


def random_nilpotent(n: int, seed: Seed = None) -> ComplexMatrix:
    """Haar unitary conjugate of ``random_strictly_upper(n)``."""
    rng = _rng(seed)
    upper = random_strictly_upper(n, rng)
    u = haar_unitary(n, rng)
    return u @ upper @ u.conj().T


def random_traceless(n: int, seed: Seed = None) -> ComplexMatrix:
    """Gaussian matrix with its trace removed."""
    if n < 1:
        raise ValueError("n must be positive")
    x = _complex_gaussian(_rng(seed), (n, n))
    return x - np.trace(x) / n * np.eye(n)
