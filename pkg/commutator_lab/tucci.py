"""Finite tensor truncations of the nilpotent-leg operators ``V_n``.

``V_n`` acts as ``e = [[0, 1], [0, 0]]`` on the n-th factor of a tensor
product of N copies of the 2x2 matrices (leg 1 is the first Kronecker
factor) and as the identity elsewhere. With ``A = sum a_n V_n``,
``B = sum b_n V_n V_n^*`` and ``C = sum c_n V_n``, the per-leg identity
``[e e^*, e] = e`` and the commutation of distinct legs give ``A = [B, C]``
whenever ``a_n = b_n c_n``. Operators are kept symbolic (a sum of per-leg
products) and applied to vectors without forming ``2^N x 2^N`` matrices.
"""

import csv
import functools
import logging
import math
from collections.abc import Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO

import numpy as np
import numpy.typing as npt
from scipy.sparse.linalg import LinearOperator

from commutator_lab.config import get_thread_count
from commutator_lab.exceptions import CertificateViolation, CoefficientMismatch, NonConvergence
from commutator_lab.matcore import ComplexMatrix, l2_norm, power_iteration_norm

logger = logging.getLogger(__name__)

E = np.array([[0, 1], [0, 0]], dtype=np.complex128)
ESTAR = E.conj().T
P = E @ ESTAR
Q = ESTAR @ E
I2 = np.eye(2, dtype=np.complex128)

DENSE_CAP = 12
# Depths up to this use dense norms by default
DENSE_NORM_DEPTH = 8
CERTIFY_REL_TOL = 1e-6
CERTIFY_MAX_ITER = 1000
CERTIFY_SLACK = 1e-8


class TucciMode(str, Enum):
    DENSE = "dense"
    MATRIX_FREE = "matrix-free"


@dataclass(frozen=True, eq=False)
class Term:
    """``coefficient`` times the tensor product of ``legs`` (identity elsewhere)."""

    coefficient: complex
    legs: Mapping[int, ComplexMatrix] = field(default_factory=dict)


class TensorOperator:
    """Sum of per-leg tensor products on ``N`` two-dimensional legs.

    Args:
        depth: Number of legs ``N``; the operator acts on ``C^(2^N)``.
        terms: Terms of the sum. Leg indices run from 1 to ``depth``.
    """

    def __init__(self, depth: int, terms: Iterable[Term] = ()) -> None:
        if depth < 1:
            raise ValueError("depth must be positive")
        self.depth = depth
        self.terms: tuple[Term, ...] = tuple(terms)
        for term in self.terms:
            for leg, matrix in term.legs.items():
                if not 1 <= leg <= depth:
                    raise IndexError(f"leg {leg} outside 1..{depth}")
                if np.shape(matrix) != (2, 2):
                    raise ValueError(f"leg {leg} factor must be 2x2")

    @classmethod
    def identity(cls, depth: int, coefficient: complex = 1.0) -> "TensorOperator":
        return cls(depth, [Term(complex(coefficient))])

    @property
    def dim(self) -> int:
        return 2**self.depth

    def __repr__(self) -> str:
        return f"TensorOperator(depth={self.depth}, terms={len(self.terms)})"

    def _check_depth(self, other: "TensorOperator") -> None:
        if other.depth != self.depth:
            raise ValueError(f"depth mismatch: {self.depth} vs {other.depth}")

    def __add__(self, other: "TensorOperator") -> "TensorOperator":
        self._check_depth(other)
        return TensorOperator(self.depth, self.terms + other.terms)

    def __mul__(self, scalar: complex) -> "TensorOperator":
        return TensorOperator(self.depth, [Term(scalar * t.coefficient, t.legs) for t in self.terms])

    __rmul__ = __mul__

    def __neg__(self) -> "TensorOperator":
        return self * -1

    def __sub__(self, other: "TensorOperator") -> "TensorOperator":
        return self + (-other)

    def __matmul__(self, other: "TensorOperator") -> "TensorOperator":
        self._check_depth(other)
        products = []
        for left in self.terms:
            for right in other.terms:
                legs = {}
                for leg in set(left.legs) | set(right.legs):
                    legs[leg] = left.legs.get(leg, I2) @ right.legs.get(leg, I2)
                products.append(Term(left.coefficient * right.coefficient, legs))
        return TensorOperator(self.depth, products)

    def commutator(self, other: "TensorOperator") -> "TensorOperator":
        return self @ other - other @ self

    def adjoint(self) -> "TensorOperator":
        return TensorOperator(
            self.depth,
            [
                Term(np.conj(t.coefficient), {leg: m.conj().T for leg, m in t.legs.items()})
                for t in self.terms
            ],
        )

    def apply(self, x: npt.ArrayLike) -> npt.NDArray[np.complex128]:
        """Apply to a vector of length ``2^N`` or to the columns of a ``(2^N, k)`` array."""
        x = np.asarray(x, dtype=np.complex128)
        if x.shape[0] != self.dim or x.ndim > 2:
            raise ValueError(f"expected leading dimension {self.dim}, got shape {x.shape}")
        batch = x.reshape((2,) * self.depth + x.shape[1:])
        out = np.zeros_like(batch)
        for term in self.terms:
            y = batch
            for leg, matrix in term.legs.items():
                axis = leg - 1
                y = np.moveaxis(np.tensordot(matrix, y, axes=([1], [axis])), 0, axis)
            out += term.coefficient * y
        return out.reshape(x.shape)

    def as_linear_operator(self) -> LinearOperator:
        adjoint = self.adjoint()
        return LinearOperator(
            (self.dim, self.dim),
            matvec=self.apply,
            rmatvec=adjoint.apply,
            matmat=self.apply,
            rmatmat=adjoint.apply,
            dtype=np.complex128,
        )

    def to_dense(self, cap: int = DENSE_CAP) -> ComplexMatrix:
        """Materialize as a ``2^N x 2^N`` matrix (``N <= cap``)."""
        if self.depth > cap:
            raise ValueError(f"depth {self.depth} exceeds the dense cap {cap}")
        dense = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for term in self.terms:
            factors = [term.legs.get(leg, I2) for leg in range(1, self.depth + 1)]
            dense += term.coefficient * functools.reduce(np.kron, factors)
        return dense

    def _leg_stack(self) -> tuple[npt.NDArray[np.complex128], npt.NDArray[np.complex128]]:
        coefficients = np.array([t.coefficient for t in self.terms], dtype=np.complex128)
        stack = np.broadcast_to(I2, (len(self.terms), self.depth, 2, 2)).copy()
        for s, term in enumerate(self.terms):
            for leg, matrix in term.legs.items():
                stack[s, leg - 1] = matrix
        return coefficients, stack

    def trace_inner(self, other: "TensorOperator") -> complex:
        """``tau(self^* other)`` computed leg by leg."""
        self._check_depth(other)
        if not self.terms or not other.terms:
            return 0j
        left_coef, left = self._leg_stack()
        right_coef, right = other._leg_stack()
        per_leg = np.einsum("slij,tlij->stl", left.conj(), right) / 2
        return complex(left_coef.conj() @ np.prod(per_leg, axis=2) @ right_coef)

    def normalized_trace(self) -> complex:
        return TensorOperator.identity(self.depth).trace_inner(self)

    def l2_norm(self) -> float:
        """Exact ``tau(X^* X)^(1/2)``."""
        return math.sqrt(max(self.trace_inner(self).real, 0.0))

    def is_diagonal(self) -> bool:
        return all(np.count_nonzero(m - np.diag(np.diag(m))) == 0 for t in self.terms for m in t.legs.values())

    def diagonal(self) -> npt.NDArray[np.complex128]:
        """Diagonal of a diagonal operator (applied to the all-ones vector)."""
        if not self.is_diagonal():
            raise ValueError("operator is not diagonal")
        return self.apply(np.ones(self.dim, dtype=np.complex128))

    def conditional_expectation(self, legs: Iterable[int]) -> "TensorOperator":
        """Keep the diagonal part on ``legs``; replace every other leg by its normalized trace."""
        kept = set(legs)
        if not kept <= set(range(1, self.depth + 1)):
            raise IndexError(f"legs {sorted(kept)} outside 1..{self.depth}")
        terms = []
        for term in self.terms:
            coefficient = term.coefficient
            factors = {}
            for leg, matrix in term.legs.items():
                if leg in kept:
                    factors[leg] = np.diag(np.diag(matrix))
                else:
                    coefficient *= np.trace(matrix) / 2
            terms.append(Term(coefficient, factors))
        return TensorOperator(self.depth, terms)

    def operator_norm(
        self,
        dense: bool | None = None,
        rel_tol: float = CERTIFY_REL_TOL,
        max_iter: int = CERTIFY_MAX_ITER,
        start: npt.ArrayLike | None = None,
    ) -> float:
        """Largest singular value, dense for small depths or by power iteration."""
        if dense is None:
            dense = self.depth <= DENSE_NORM_DEPTH
        if dense:
            return float(np.linalg.norm(self.to_dense(), 2))
        if self.is_diagonal():
            return float(np.max(np.abs(self.diagonal())))
        floor = np.finfo(float).eps * sum(abs(t.coefficient) for t in self.terms)
        return power_iteration_norm(
            self.as_linear_operator(), rel_tol=rel_tol, max_iter=max_iter, start=start, atol=floor
        )


def build_V(n: int, depth: int) -> TensorOperator:
    """``V_n``: ``e`` on leg ``n``, identity on the other legs."""
    if not 1 <= n <= depth:
        raise IndexError(f"leg {n} outside 1..{depth}")
    return TensorOperator(depth, [Term(1.0, {n: E})])


def _coefficients(values: npt.ArrayLike, depth: int, name: str) -> npt.NDArray[np.complex128]:
    arr = np.asarray(values, dtype=np.complex128).ravel()
    if arr.size != depth:
        raise ValueError(f"{name} has {arr.size} coefficients, expected {depth}")
    return arr


def build_A(a: npt.ArrayLike, depth: int) -> TensorOperator:
    """``sum a_n V_n``."""
    coefficients = _coefficients(a, depth, "a")
    return TensorOperator(depth, [Term(coefficients[n - 1], {n: E}) for n in range(1, depth + 1)])


def build_B(b: npt.ArrayLike, depth: int, legs: Iterable[int] | None = None) -> TensorOperator:
    """``sum b_n V_n V_n^*`` over ``legs`` (all legs by default)."""
    coefficients = _coefficients(b, depth, "b")
    legs = range(1, depth + 1) if legs is None else sorted(set(legs))
    return TensorOperator(depth, [Term(coefficients[n - 1], {n: P}) for n in legs])


build_C = build_A


def sqrt_split(a: npt.ArrayLike) -> tuple[npt.NDArray[np.complex128], npt.NDArray[np.complex128]]:
    """Split ``a_n = b_n c_n`` with ``b_n = c_n = sqrt(a_n)``."""
    root = np.sqrt(np.asarray(a, dtype=np.complex128))
    return root, root.copy()


@dataclass(frozen=True, eq=False)
class TucciConfig:
    """Coefficient triple on ``depth`` legs.

    Attributes:
        depth: Number of legs.
        a: Coefficients of ``A``.
        b: Coefficients of ``B``.
        c: Coefficients of ``C``.
        mode: Dense matrices (``depth <= DENSE_CAP``) or matrix-free.
    """

    depth: int
    a: npt.NDArray[np.complex128]
    b: npt.NDArray[np.complex128]
    c: npt.NDArray[np.complex128]
    mode: TucciMode = TucciMode.DENSE

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise ValueError("depth must be positive")
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, _coefficients(getattr(self, name), self.depth, name))
        object.__setattr__(self, "mode", TucciMode(self.mode))
        if self.mode is TucciMode.DENSE and self.depth > DENSE_CAP:
            raise ValueError(f"dense mode supports depth <= {DENSE_CAP}, got {self.depth}")

    @classmethod
    def power_law(cls, r: float, depth: int, mode: TucciMode | str = TucciMode.DENSE) -> "TucciConfig":
        """``a_n = n^(-r)`` with the square-root split."""
        a = np.arange(1, depth + 1, dtype=float) ** -r
        b, c = sqrt_split(a)
        return cls(depth, a, b, c, TucciMode(mode))

    def coefficient_defect(self) -> float:
        return float(np.max(np.abs(self.a - self.b * self.c)))

    def check_split(self) -> None:
        """Raise ``CoefficientMismatch`` unless ``a_n = b_n c_n`` to rounding."""
        defect = self.coefficient_defect()
        scale = max(1.0, float(np.max(np.abs(self.a))))
        if defect > 4 * np.finfo(float).eps * scale:
            raise CoefficientMismatch(defect)


@dataclass(frozen=True)
class IdentityReport:
    depth: int
    mode: TucciMode
    residual_op: float
    residual_l2: float
    coefficient_defect: float


def tucci_commutator_identity(cfg: TucciConfig, strict: bool = True) -> IdentityReport:
    """Measure ``A_N - [B_N, C_N]`` in operator and L2 norm.

    Args:
        cfg: Coefficient triple.
        strict: Reject triples with ``a_n != b_n c_n``; otherwise the
            residual ``||sum (a_n - b_n c_n) V_n||`` is reported.

    Raises:
        CoefficientMismatch: ``strict`` and the split is inconsistent.
    """
    if strict:
        cfg.check_split()
    a_op, b_op, c_op = build_A(cfg.a, cfg.depth), build_B(cfg.b, cfg.depth), build_C(cfg.c, cfg.depth)

    if cfg.mode is TucciMode.DENSE:
        a, b, c = a_op.to_dense(), b_op.to_dense(), c_op.to_dense()
        difference = a - (b @ c - c @ b)
        residual_op = float(np.linalg.norm(difference, 2))
        residual_l2 = l2_norm(difference)
    else:
        a_lin, b_lin, c_lin = (op.as_linear_operator() for op in (a_op, b_op, c_op))
        difference_lin = a_lin - (b_lin @ c_lin - c_lin @ b_lin)
        # Rounding of the summed terms; anything at this level counts as zero
        magnitude = float(np.sum(np.abs(cfg.a)) + 2 * np.sum(np.abs(cfg.b)) * np.sum(np.abs(cfg.c)))
        floor = 64 * np.finfo(float).eps * magnitude
        residual_op = power_iteration_norm(difference_lin, rel_tol=CERTIFY_REL_TOL, max_iter=CERTIFY_MAX_ITER, atol=floor)
        residual_l2 = (a_op - b_op.commutator(c_op)).l2_norm()

    logger.debug("identity residual at depth %d (%s): %.3e", cfg.depth, cfg.mode.value, residual_op)
    return IdentityReport(cfg.depth, cfg.mode, residual_op, residual_l2, cfg.coefficient_defect())


def flat_vector(depth: int) -> npt.NDArray[np.complex128]:
    """``2^(-N/2) (1, ..., 1)``."""
    return np.full(2**depth, 2 ** (-depth / 2), dtype=np.complex128)


def flat_vector_expectation(k: int, depth: int) -> complex:
    """``<V_k x, x>`` for the normalized all-ones vector ``x`` (equals 1/2)."""
    x = flat_vector(depth)
    return complex(np.vdot(x, build_V(k, depth).apply(x)))


@dataclass(frozen=True)
class CertificateResult:
    """Lower bound ``1/2 sum |c_k|`` against an estimate of ``||C_N||``."""

    lower: float
    norm_estimate: float
    converged: bool = True

    @property
    def holds(self) -> bool:
        return self.lower <= self.norm_estimate + CERTIFY_SLACK


def c_lower_bound_certificate(
    c: npt.ArrayLike,
    depth: int,
    mode: TucciMode | str | None = None,
    allow_unconverged: bool = False,
) -> CertificateResult:
    """Certify ``1/2 sum |c_k| <= ||C_N||``.

    Phases are removed by taking moduli. The lower bound is
    ``|<C_N x, x>|`` for the flat vector ``x``; power iteration starts from
    that vector, so every estimate it produces is at least the bound.

    Args:
        c: ``depth`` coefficients.
        depth: Number of legs.
        mode: Dense or matrix-free norm; dense up to depth 8 by default.
        allow_unconverged: Return the best power-iteration estimate instead
            of raising when the iteration cap is reached.

    Raises:
        NonConvergence: Power iteration hit its cap.
        CertificateViolation: The estimate fell below the bound.
    """
    moduli = np.abs(_coefficients(c, depth, "c"))
    lower = float(moduli.sum() / 2)
    operator = build_C(moduli, depth)
    if mode is None:
        dense = depth <= DENSE_NORM_DEPTH
    else:
        dense = TucciMode(mode) is TucciMode.DENSE
    converged = True
    try:
        estimate = operator.operator_norm(dense=dense, start=flat_vector(depth))
    except NonConvergence as err:
        if not allow_unconverged:
            raise
        logger.warning("||C_%d|| estimate did not converge; using best estimate %.6g", depth, err.best_estimate)
        estimate, converged = err.best_estimate, False
    result = CertificateResult(lower, estimate, converged)
    if not result.holds:
        raise CertificateViolation(f"lower bound {lower:.12g} exceeds norm estimate {estimate:.12g}")
    return result


def _check_legs(legs: Iterable[int], depth: int) -> list[int]:
    chosen = sorted(set(int(n) for n in legs))
    if any(not 1 <= n <= depth for n in chosen):
        raise IndexError(f"legs {chosen} outside 1..{depth}")
    return chosen


def b_l2_formula_check(b: npt.ArrayLike, legs: Iterable[int], depth: int) -> tuple[float, float]:
    """Compare ``||sum_{n in K} b_n V_n V_n^*||_2^2`` with ``(sum |b_n|^2 + |sum b_n|^2) / 4``.

    Returns:
        ``(lhs, rhs)``; ``b`` is indexed by leg (``b[n - 1]`` for leg ``n``).
    """
    coefficients = _coefficients(b, depth, "b")
    chosen = _check_legs(legs, depth)
    lhs = build_B(coefficients, depth, chosen).l2_norm() ** 2
    selected = coefficients[[n - 1 for n in chosen]]
    rhs = float((np.sum(np.abs(selected) ** 2) + abs(np.sum(selected)) ** 2) / 4)
    return lhs, rhs


@dataclass(frozen=True)
class ConditionalReport:
    """``E_F(B) P`` against ``1/2 (y + sum_{n in F} b_n) P``."""

    expected: complex
    observed: complex
    residual: float


def conditional_projection_check(b: npt.ArrayLike, legs: Iterable[int], y: complex, depth: int) -> ConditionalReport:
    """Check the conditional expectation identity for ``B = sum b_n (V_n V_n^* - 1/2) + y/2``.

    ``P`` is the product of ``V_n V_n^*`` over the legs in ``F`` (the
    identity when ``F`` is empty); ``y`` is a free scalar.
    """
    coefficients = _coefficients(b, depth, "b")
    chosen = _check_legs(legs, depth)
    centered = build_B(coefficients, depth) - TensorOperator.identity(depth, complex(np.sum(coefficients)) / 2)
    operator = centered + TensorOperator.identity(depth, complex(y) / 2)
    projection = TensorOperator(depth, [Term(1.0, {n: P for n in chosen})])

    product = operator.conditional_expectation(chosen) @ projection
    expected = (complex(y) + complex(np.sum(coefficients[[n - 1 for n in chosen]]))) / 2
    observed = product.trace_inner(projection) / projection.trace_inner(projection)
    residual = (product - expected * projection).l2_norm()
    return ConditionalReport(expected, complex(observed), residual)


@dataclass(frozen=True)
class ScanRow:
    depth: int
    lower: float
    norm_c: float
    sum_b: float
    norm_b: float
    residual: float

    HEADER = ("N", "lower_bound", "norm_C", "sum_B", "norm_B", "residual")

    def as_tuple(self) -> tuple[int | float, ...]:
        return (self.depth, self.lower, self.norm_c, self.sum_b, self.norm_b, self.residual)


def _scan_row(r: float, depth: int, mode: TucciMode) -> ScanRow:
    cfg = TucciConfig.power_law(r, depth, mode)
    certificate = c_lower_bound_certificate(cfg.c, depth, mode=mode, allow_unconverged=True)
    b_op = build_B(cfg.b, depth)
    return ScanRow(
        depth=depth,
        lower=certificate.lower,
        norm_c=certificate.norm_estimate,
        sum_b=float(np.sum(cfg.b.real)),
        norm_b=float(np.max(np.abs(b_op.diagonal()))),
        residual=tucci_commutator_identity(cfg).residual_op,
    )


def norm_scan(
    r: float,
    depths: Sequence[int],
    split: str = "sqrt",
    mode: TucciMode | str | None = None,
) -> list[ScanRow]:
    """Norm growth of ``B_N`` and ``C_N`` for ``a_n = n^(-r)`` over ``depths``.

    Rows are computed in parallel and returned in the order of ``depths``.
    Depths above 8 run matrix-free unless ``mode`` says otherwise.

    Raises:
        ValueError: ``r`` outside ``(1, 2]`` or an unknown split.
    """
    if not 1 < r <= 2:
        raise ValueError(f"r must lie in (1, 2], got {r}")
    if split != "sqrt":
        raise ValueError(f"unknown split {split!r}; only 'sqrt' is built in")

    def modes() -> Iterable[TucciMode]:
        for depth in depths:
            if mode is not None:
                yield TucciMode(mode)
            else:
                yield TucciMode.DENSE if depth <= DENSE_NORM_DEPTH else TucciMode.MATRIX_FREE

    with ThreadPoolExecutor(max_workers=get_thread_count()) as pool:
        rows = list(pool.map(_scan_row, [r] * len(depths), depths, modes()))
    logger.info("norm scan r=%g over %d depths", r, len(rows))
    return rows


def write_scan_csv(rows: Iterable[ScanRow], target: str | Path | IO[str]) -> None:
    """Write scan rows as CSV with a header line."""
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="", encoding="utf-8") as handle:
            write_scan_csv(rows, handle)
        return
    writer = csv.writer(target)
    writer.writerow(ScanRow.HEADER)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row.as_tuple()])
