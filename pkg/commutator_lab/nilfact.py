"""Single-commutator factorizations of nilpotent matrices.

A nilpotent matrix is unitarily similar to a strictly upper triangular one,
and a strictly upper triangular ``a`` is exactly ``[S, c]`` for the upper
shift ``S`` and an upper triangular ``c`` filled in by a recurrence. The
triangularizing basis comes either from the kernel staircase (default) or
from the kernel-chain flag decomposition, which groups the space into blocks
of orbit subspaces ``q_1, ..., q_k`` with ``T q_{i+1} = q_i``.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
import numpy.typing as npt
import scipy.linalg

from commutator_lab.config import Tolerances, resolve_tolerances
from commutator_lab.exceptions import NilpotencyViolation, NotStrictlyUpperTriangular, RankDegeneracy
from commutator_lab.factorization import Factorization, Method
from commutator_lab.matcore import (
    ComplexMatrix,
    as_matrix,
    kernel_staircase,
    operator_norm,
    range_with_gap,
    require_nilpotent,
    schur_strict_triangularize,
)
from commutator_lab.normalfact import shift_matrix

logger = logging.getLogger(__name__)

# Smallest accepted ratio between the last kept and first discarded singular value
MIN_GAP_RATIO = 10.0


class NilpotentPath(str, Enum):
    """Triangularization used by ``factor_nilpotent``."""

    SCHUR = "schur"
    FLAG = "flag"


@dataclass(frozen=True, eq=False)
class FlagDecomposition:
    """Kernel-chain flag decomposition of a nilpotent matrix.

    Columns of ``basis`` are grouped block by block; block ``j`` holds
    ``block_sizes[j]`` consecutive groups of ``subspace_dims[j]`` columns, the
    flag subspaces ``f_1, ..., f_k`` in that order.

    Attributes:
        block_sizes: Strictly decreasing block sizes ``k_1 > k_2 > ...``.
        basis: Unitary whose columns are the flag subspaces.
        subspace_dims: Common dimension of the flag subspaces of each block.
        chains: Per block, the orbit bases ``q_1, ..., q_k`` in the original
            coordinates.
    """

    block_sizes: tuple[int, ...]
    basis: ComplexMatrix
    subspace_dims: tuple[int, ...]
    chains: tuple[tuple[ComplexMatrix, ...], ...]

    def conjugated(self, t: npt.ArrayLike) -> ComplexMatrix:
        """``basis^* t basis``."""
        t = as_matrix(t)
        return self.basis.conj().T @ t @ self.basis

    def block_slices(self) -> list[slice]:
        """Column range of each block inside ``basis``."""
        slices, start = [], 0
        for size, dim in zip(self.block_sizes, self.subspace_dims):
            slices.append(slice(start, start + size * dim))
            start += size * dim
        return slices

    def kernel_dims(self) -> tuple[int, ...]:
        """Dimensions of ``ker T^i ⊖ ker T^(i-1)`` implied by the blocks."""
        top = max(self.block_sizes, default=0)
        return tuple(
            sum(dim for size, dim in zip(self.block_sizes, self.subspace_dims) if size >= i)
            for i in range(1, top + 1)
        )

    def orbit_angles(self) -> tuple[tuple[float, ...], ...]:
        """Smallest principal angle between each ``q_i`` and ``q_1 ∨ ... ∨ q_(i-1)``.

        One tuple per block, starting at ``i = 2``. Angles bounded away from
        zero mean each orbit subspace meets the earlier joins only in 0.
        """
        result = []
        for chain in self.chains:
            angles = []
            for i in range(1, len(chain)):
                earlier = np.column_stack(chain[:i])
                angles.append(float(np.min(scipy.linalg.subspace_angles(chain[i], earlier))))
            result.append(tuple(angles))
        return tuple(result)


def _cutoff(t: ComplexMatrix, tol: Tolerances) -> float:
    return tol.rank_rel * operator_norm(t) * t.shape[0]


def _check_gap(gap: float, message: str) -> None:
    if gap < MIN_GAP_RATIO:
        raise RankDegeneracy(gap, message)


def _kernel_chain(t: ComplexMatrix, cutoff: float) -> list[ComplexMatrix]:
    return kernel_staircase(t, cutoff, min_gap=MIN_GAP_RATIO)


def kernel_chain(t: npt.ArrayLike, tol: Tolerances | None = None) -> list[ComplexMatrix]:
    """Orthonormal bases of ``p_1 = ker T`` and ``p_j = ker T^j ⊖ ker T^(j-1)``.

    The bases have weakly decreasing dimensions and together span the space.

    Raises:
        NilpotencyViolation: ``t`` is not nilpotent within tolerance.
        RankDegeneracy: A kernel dimension is numerically ambiguous.
    """
    t = as_matrix(t)
    tol = resolve_tolerances(tol)
    require_nilpotent(t, tol)
    if not np.any(t):
        return [np.eye(t.shape[0], dtype=np.complex128)]
    return _kernel_chain(t, _cutoff(t, tol))


def _independent_part(vectors: ComplexMatrix, against: ComplexMatrix, rank: int, threshold: float) -> ComplexMatrix:
    """Orthonormal basis of the part of ``vectors`` orthogonal to ``against``."""
    projected = vectors - against @ (against.conj().T @ vectors)
    u, singular, _ = scipy.linalg.svd(projected, full_matrices=False)
    smallest = float(singular[rank - 1]) if singular.size >= rank else 0.0
    if smallest <= threshold:
        raise RankDegeneracy(smallest / threshold, "flag subspace lost rank against the previous joins")
    return u[:, :rank]


def flag_decomposition(t: npt.ArrayLike, tol: Tolerances | None = None) -> FlagDecomposition:
    """Split the space into blocks on which ``t`` is strictly block upper triangular.

    Each round works on the orthogonal complement of the blocks found so far,
    with ``comp`` the compression of ``t`` to it. With ``k`` the nilpotency
    index of ``comp``, ``q_k`` is the top kernel-chain subspace and
    ``q_i = ran(comp q_(i+1))``. The flag subspaces are the successive
    differences ``f_i = (q_1 ∨ ... ∨ q_i) ⊖ (q_1 ∨ ... ∨ q_(i-1))``, so ``t``
    maps each ``f_(i+1)`` into ``f_1 ⊕ ... ⊕ f_i``. The compression to the
    remaining complement has strictly smaller index.

    Raises:
        NilpotencyViolation: ``t`` is not nilpotent within tolerance.
        RankDegeneracy: A numerical rank decision is ambiguous.
    """
    t = as_matrix(t)
    tol = resolve_tolerances(tol)
    require_nilpotent(t, tol)
    n = t.shape[0]
    cutoff = _cutoff(t, tol)
    independence = tol.rank_rel * n

    remaining = np.eye(n, dtype=np.complex128)
    columns: list[ComplexMatrix] = []
    block_sizes: list[int] = []
    subspace_dims: list[int] = []
    chains: list[tuple[ComplexMatrix, ...]] = []

    while remaining.shape[1] > 0:
        comp = remaining.conj().T @ t @ remaining
        r = comp.shape[0]
        if np.any(comp):
            chain = _kernel_chain(comp, cutoff)
        else:
            chain = [np.eye(r, dtype=np.complex128)]
        size, dim = len(chain), chain[-1].shape[1]
        if block_sizes and size >= block_sizes[-1]:
            raise RankDegeneracy(0.0, f"block size {size} does not decrease after {block_sizes[-1]}")

        orbit = [chain[-1]]
        for _ in range(size - 1):
            image, gap = range_with_gap(comp @ orbit[0], cutoff)
            _check_gap(gap, "ambiguous rank of an orbit subspace")
            if image.shape[1] != dim:
                raise RankDegeneracy(gap, f"orbit subspace has rank {image.shape[1]}, expected {dim}")
            orbit.insert(0, image)

        joined = np.zeros((r, 0), dtype=np.complex128)
        for q in orbit:
            joined = np.column_stack([joined, _independent_part(q, joined, dim, independence)])

        logger.debug("flag block of size %d with %d-dimensional subspaces", size, dim)
        columns.append(remaining @ joined)
        chains.append(tuple(remaining @ q for q in orbit))
        block_sizes.append(size)
        subspace_dims.append(dim)
        remaining = remaining @ scipy.linalg.null_space(joined.conj().T)

    return FlagDecomposition(
        block_sizes=tuple(block_sizes),
        basis=np.column_stack(columns),
        subspace_dims=tuple(subspace_dims),
        chains=tuple(chains),
    )


def strict_triangular_factor(a: npt.ArrayLike) -> Factorization:
    """Exact factorization ``a = [S, c]`` of a strictly upper triangular matrix.

    ``S`` is the upper shift. ``c`` is upper triangular with zero first row
    and column: its second row copies the first row of ``a`` and each later
    row satisfies ``c[r+1, j] = a[r, j] + c[r, j-1]``.

    Raises:
        NotStrictlyUpperTriangular: ``a`` has a nonzero entry on or below the
            diagonal.
    """
    a = as_matrix(a)
    if np.any(np.tril(a)):
        raise NotStrictlyUpperTriangular("input has nonzero entries on or below the diagonal")
    n = a.shape[0]
    c = np.zeros_like(a)
    for r in range(n - 1):
        c[r + 1, r + 1 :] = a[r, r + 1 :] + c[r, r : n - 1]
    return Factorization.from_pair(a, shift_matrix(n), c, Method.NILPOTENT_RECURRENCE)


def factor_nilpotent(
    t: npt.ArrayLike,
    tol: Tolerances | None = None,
    path: NilpotentPath | str = NilpotentPath.SCHUR,
) -> Factorization:
    """Factor a nilpotent matrix as ``[b, c]`` with ``b`` a conjugated shift.

    Args:
        t: Nilpotent matrix.
        tol: Tolerances; the active ones when None.
        path: ``schur`` (kernel staircase, default) or ``flag`` (kernel-chain flags).

    Raises:
        NilpotencyViolation: ``t`` is not nilpotent within tolerance.
        RankDegeneracy: The flag path hit an ambiguous rank decision.
    """
    t = as_matrix(t)
    tol = resolve_tolerances(tol)
    path = NilpotentPath(path)
    if path is NilpotentPath.SCHUR:
        unitary, upper = schur_strict_triangularize(t, tol)
    else:
        unitary = flag_decomposition(t, tol).basis
        conjugated = unitary.conj().T @ t @ unitary
        lower = float(np.linalg.norm(np.tril(conjugated)))
        scale = operator_norm(t)
        if lower > tol.residual_rel * scale:
            raise RankDegeneracy(0.0, f"flag basis leaves a lower part of norm {lower:.3e}")
        upper = np.triu(conjugated, 1)

    inner = strict_triangular_factor(upper)
    unitary_h = unitary.conj().T
    b = unitary @ inner.b @ unitary_h
    c = unitary @ inner.c @ unitary_h
    logger.debug("nilpotent factorization n=%d via %s path", t.shape[0], path.value)
    return Factorization.from_pair(t, b, c, Method.NILPOTENT_RECURRENCE)
