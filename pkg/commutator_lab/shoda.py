"""Baseline factorization of arbitrary traceless matrices.

A traceless matrix is unitarily similar to one with zero diagonal, and a
zero-diagonal ``z`` equals ``[diag(0, 1, ..., n-1), c]`` with
``c[i, j] = z[i, j] / (i - j)``. No bound on ``||b|| ||c||`` is claimed.
"""

import logging

import numpy as np
import numpy.typing as npt

from commutator_lab.config import Tolerances, resolve_tolerances
from commutator_lab.exceptions import NonConvergence
from commutator_lab.factorization import Factorization, Method
from commutator_lab.matcore import ComplexMatrix, center_trace, operator_norm

logger = logging.getLogger(__name__)

MAX_SWEEPS = 100


def _rotation_angle(a: float, b: float, c: float) -> float:
    """Solve ``a + b cos(phi) + c sin(phi) = 0`` for ``phi``.

    Requires ``|a| <= hypot(b, c)`` up to rounding; the cosine is clipped.
    """
    radius = np.hypot(b, c)
    if radius == 0:
        return 0.0
    base = np.arctan2(c, b)
    offset = np.arccos(np.clip(-a / radius, -1.0, 1.0))
    candidates = (base + offset, base - offset)
    residuals = [abs(a + b * np.cos(phi) + c * np.sin(phi)) for phi in candidates]
    return float(candidates[int(np.argmin(residuals))])


def _givens(theta: float, psi: float) -> ComplexMatrix:
    cos, sin = np.cos(theta), np.sin(theta)
    return np.array(
        [[cos, -np.exp(-1j * psi) * sin], [np.exp(1j * psi) * sin, cos]],
        dtype=np.complex128,
    )


def _pick_pair(component: npt.NDArray[np.float64], threshold: float) -> tuple[int, int] | None:
    """Largest entry paired with the largest entry of opposite sign."""
    i = int(np.argmax(np.abs(component)))
    if abs(component[i]) <= threshold:
        return None
    opposite = np.flatnonzero((np.sign(component) == -np.sign(component[i])) & (np.abs(component) > threshold))
    if opposite.size == 0:
        return None
    j = int(opposite[np.argmax(np.abs(component[opposite]))])
    return i, j


def zero_diagonal_unitary(
    a: npt.ArrayLike,
    tol: Tolerances | None = None,
    max_sweeps: int = MAX_SWEEPS,
) -> ComplexMatrix:
    """Unitary ``w`` such that ``w^* a w`` has a negligible diagonal.

    Works by 2x2 rotations in two stages. The first zeroes the imaginary
    parts of the diagonal one entry at a time; the second zeroes the real
    parts with a phase chosen so the rotated diagonal stays real. Each
    rotation pairs the largest remaining entry with the largest entry of
    opposite sign and zeroes the former, so in exact arithmetic each stage
    ends after at most ``n - 1`` rotations.

    Raises:
        TraceNotZero: The trace of ``a`` is not negligible.
        NonConvergence: ``max_sweeps`` sweeps left the diagonal above
            tolerance; carries the achieved diagonal norm.
    """
    tol = resolve_tolerances(tol)
    s = center_trace(a, tol)
    n = s.shape[0]
    scale = operator_norm(s)
    w = np.eye(n, dtype=np.complex128)
    if scale == 0:
        return w

    threshold = 64 * np.finfo(float).eps * scale
    rotations = 0
    for stage in ("imag", "real"):
        for sweep in range(max_sweeps):
            diagonal = np.diag(s)
            component = diagonal.imag if stage == "imag" else diagonal.real
            if np.max(np.abs(component)) <= threshold:
                break
            stalled = False
            for _ in range(n - 1):
                diagonal = np.diag(s)
                pair = _pick_pair(diagonal.imag if stage == "imag" else diagonal.real, threshold)
                if pair is None:
                    stalled = True
                    break
                i, j = pair
                x, y = s[i, i], s[j, j]
                if stage == "imag":
                    psi = 0.0
                    coupling = s[i, j] + s[j, i]
                    phi = _rotation_angle(
                        (x.imag + y.imag) / 2, (x.imag - y.imag) / 2, coupling.imag / 2
                    )
                else:
                    psi = -float(np.angle(s[i, j] - np.conj(s[j, i])))
                    coupling = s[i, j] * np.exp(1j * psi) + s[j, i] * np.exp(-1j * psi)
                    phi = _rotation_angle((x.real + y.real) / 2, (x.real - y.real) / 2, coupling.real / 2)
                g = _givens(phi / 2, psi)
                s[:, [i, j]] = s[:, [i, j]] @ g
                s[[i, j], :] = g.conj().T @ s[[i, j], :]
                w[:, [i, j]] = w[:, [i, j]] @ g
                rotations += 1
            if stalled:
                break
        else:
            achieved = float(np.linalg.norm(np.diag(s)))
            raise NonConvergence(achieved, max_sweeps, f"diagonal zeroing ({stage} stage) did not converge")

    achieved = float(np.max(np.abs(np.diag(s))))
    logger.debug("zero-diagonal reduction: %d rotations, max diagonal %.3e", rotations, achieved)
    if achieved > tol.residual_rel * scale:
        raise NonConvergence(achieved, max_sweeps, "diagonal zeroing stalled above tolerance")
    return w


def factor_traceless(a: npt.ArrayLike, tol: Tolerances | None = None) -> Factorization:
    """Factor any traceless matrix as ``[b, c]`` via a zero-diagonal reduction.

    Raises:
        TraceNotZero: The trace is not negligible.
        NonConvergence: The diagonal reduction failed.
    """
    tol = resolve_tolerances(tol)
    centered = center_trace(a, tol)
    n = centered.shape[0]
    w = zero_diagonal_unitary(centered, tol)
    z = w.conj().T @ centered @ w

    index = np.arange(n)
    b_diag = np.diag(index.astype(np.complex128))
    gaps = index[:, None] - index[None, :]
    c_diag = np.divide(z, gaps, out=np.zeros_like(z), where=gaps != 0)

    w_h = w.conj().T
    b = w @ b_diag @ w_h
    c = w @ c_diag @ w_h
    return Factorization.from_pair(centered, b, c, Method.SHODA_BASELINE)
