"""Cyclic crossed-product model.

Functions on ``Z/N`` act as diagonal matrices ``pi(f)`` and the rotation
``alpha(j) = j + s`` is implemented by a permutation unitary ``U`` with
``U pi(f) U^* = pi(f o alpha)``. For any ``g, h`` and integer ``k``::

    [U^k pi(g), pi(h)] = U^k pi(g (h - h o alpha^-k))

so when ``h`` is an eigenfunction with eigenvalue ``zeta`` and
``zeta^k != 1``, dividing by ``h (1 - zeta^-k)`` turns any ``U^k pi(f)``
into a single commutator.
"""

import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import numpy.typing as npt

from commutator_lab.exceptions import EigenvalueDegenerate, NoAdmissibleEigenvalue
from commutator_lab.factorization import Factorization, Method
from commutator_lab.matcore import ComplexMatrix
from commutator_lab.normalfact import partial_sum_diagonal
from commutator_lab.steinitz import RearrangementCertificate, center_values, rearrange

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CyclicSystem:
    """Rotation by ``shift_step`` on ``points`` sites."""

    points: int
    shift_step: int = 1

    def __post_init__(self) -> None:
        if self.points < 1:
            raise ValueError("points must be positive")

    def power(self, k: int) -> ComplexMatrix:
        """``U^k``, mapping ``e_j`` to ``e_(j - k s)``."""
        index = np.arange(self.points)
        u = np.zeros((self.points, self.points), dtype=np.complex128)
        u[(index - k * self.shift_step) % self.points, index] = 1
        return u

    @cached_property
    def unitary(self) -> ComplexMatrix:
        return self.power(1)

    def embed(self, f: npt.ArrayLike) -> ComplexMatrix:
        """``pi(f)``: the diagonal matrix of the values of ``f``."""
        return np.diag(self.values(f))

    def values(self, f: npt.ArrayLike) -> npt.NDArray[np.complex128]:
        arr = np.asarray(f, dtype=np.complex128).ravel()
        if arr.size != self.points:
            raise ValueError(f"function has {arr.size} values, expected {self.points}")
        return arr

    def act(self, f: npt.ArrayLike, k: int = 1) -> npt.NDArray[np.complex128]:
        """``f o alpha^k``."""
        return np.roll(self.values(f), -k * self.shift_step)


@dataclass(frozen=True, eq=False)
class Eigenfunction:
    """``h o alpha = zeta h``; ``usable`` is False when ``zeta = 1``."""

    m: int
    h: npt.NDArray[np.complex128]
    zeta: complex
    usable: bool


def eigenfunction(m: int, sys: CyclicSystem) -> Eigenfunction:
    """``h(j) = exp(2 pi i m j / N)`` with ``zeta = exp(2 pi i m s / N)``.

    Raises:
        ValueError: ``m`` is a multiple of ``N`` (constant ``h``).
    """
    n = sys.points
    if m % n == 0:
        raise ValueError(f"m={m} is a multiple of N={n}")
    j = np.arange(n)
    h = np.exp(2j * np.pi * ((m * j) % n) / n)
    phase = (m * sys.shift_step) % n
    zeta = complex(np.exp(2j * np.pi * phase / n))
    return Eigenfunction(m=m, h=h, zeta=zeta, usable=phase != 0)


def crossed_commutator(g: npt.ArrayLike, h: npt.ArrayLike, k: int, sys: CyclicSystem) -> ComplexMatrix:
    """Closed form of ``[U^k pi(g), pi(h)]``: ``U^k pi(g (h - h o alpha^-k))``."""
    g, h = sys.values(g), sys.values(h)
    return sys.power(k) @ sys.embed(g * (h - sys.act(h, -k)))


def covariance_residual(f: npt.ArrayLike, sys: CyclicSystem) -> float:
    """``max |U pi(f) U^* - pi(f o alpha)|`` entrywise."""
    u = sys.unitary
    return float(np.max(np.abs(u @ sys.embed(f) @ u.conj().T - sys.embed(sys.act(f)))))


def single_term_factor(f: npt.ArrayLike, m: int, sys: CyclicSystem) -> Factorization:
    """``U pi(f) = [U pi(g), pi(h)]`` with ``g = f / (h (1 - zeta^-1))``.

    Raises:
        EigenvalueDegenerate: The eigenvalue of ``h`` is 1.
    """
    return multi_term_factor({1}, {1: f}, sys, m=m)


def admissible_eigenvalue(powers: Iterable[int], sys: CyclicSystem) -> int:
    """Smallest ``m`` in ``1..N-1`` with ``zeta^k != 1`` for every ``k`` in ``powers``.

    Raises:
        NoAdmissibleEigenvalue: No such ``m`` exists.
    """
    powers = sorted(set(powers))
    n, s = sys.points, sys.shift_step
    for m in range(1, n):
        if all((m * s * k) % n != 0 for k in powers):
            return m
    raise NoAdmissibleEigenvalue(f"every eigenvalue of the {n}-point rotation has zeta^k = 1 for some k in {powers}")


def multi_term_factor(
    powers: Iterable[int],
    fs: Mapping[int, npt.ArrayLike],
    sys: CyclicSystem,
    m: int | None = None,
) -> Factorization:
    """``sum_k U^k pi(f_k) = [sum_k U^k pi(g_k), pi(h)]``.

    ``g_k = f_k / (h (1 - zeta^-k))``. The eigenfunction index ``m`` is the
    smallest admissible one unless given.

    Raises:
        NoAdmissibleEigenvalue: No eigenvalue avoids ``zeta^k = 1`` on ``powers``.
        EigenvalueDegenerate: The given ``m`` has ``zeta^k = 1`` for some ``k``.
    """
    powers = sorted(set(powers))
    if not powers or 0 in powers:
        raise ValueError("powers must be a non-empty set of nonzero integers")
    if set(fs) != set(powers):
        raise ValueError(f"functions given for {sorted(fs)}, expected {powers}")
    if m is None:
        m = admissible_eigenvalue(powers, sys)
    eig = eigenfunction(m, sys)
    n = sys.points

    b = np.zeros((n, n), dtype=np.complex128)
    target = np.zeros((n, n), dtype=np.complex128)
    for k in powers:
        if (m * sys.shift_step * k) % n == 0:
            raise EigenvalueDegenerate(eig.zeta**k)
        u_k = sys.power(k)
        f_k = sys.values(fs[k])
        g_k = f_k / (eig.h * (1 - eig.zeta ** (-k)))
        b += u_k @ sys.embed(g_k)
        target += u_k @ sys.embed(f_k)
    logger.debug("crossed factorization with m=%d, zeta=%s, powers=%s", m, eig.zeta, powers)
    return Factorization.from_pair(target, b, sys.embed(eig.h), Method.EIGENFUNCTION_CROSSED)


@dataclass(frozen=True, eq=False)
class CoboundaryRealization:
    """``f`` on ``Z/N`` with ``f - f o alpha^-1`` equal to ``values`` (step 1)."""

    f: npt.NDArray[np.complex128]
    values: npt.NDArray[np.complex128]
    system: CyclicSystem
    certificate: RearrangementCertificate

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.f)))


def coboundary_realization(values: npt.ArrayLike) -> CoboundaryRealization:
    """Realize a zero-sum tuple (rearranged) as the coboundary of a bounded ``f``.

    ``f`` is the partial-sum diagonal of the cyclic factorization, so its
    sup-norm is the prefix bound of the rearrangement.
    """
    certificate = rearrange(center_values(values))
    ordered = certificate.ordered_values
    if ordered.size == 0:
        raise ValueError("empty tuple")
    return CoboundaryRealization(
        f=np.diag(partial_sum_diagonal(ordered)).copy(),
        values=ordered,
        system=CyclicSystem(ordered.size, 1),
        certificate=certificate,
    )
