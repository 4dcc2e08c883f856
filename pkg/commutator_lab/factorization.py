"""The factorization record shared by every factorizer."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from commutator_lab.matcore import ComplexMatrix, commutator, l2_norm, operator_norm
from commutator_lab.steinitz import RearrangementCertificate


class Method(str, Enum):
    """Construction that produced a factorization."""

    NORMAL_SHIFT = "NormalShift"
    CYCLIC_UNITARY = "CyclicUnitary"
    NILPOTENT_RECURRENCE = "NilpotentRecurrence"
    SHODA_BASELINE = "ShodaBaseline"
    EIGENFUNCTION_CROSSED = "EigenfunctionCrossed"

    @property
    def exact(self) -> bool:
        """Whether the construction is an exact identity (no numerical decomposition)."""
        return self in (Method.CYCLIC_UNITARY, Method.EIGENFUNCTION_CROSSED)


@dataclass(frozen=True, eq=False)
class Factorization:
    """``target ~= [b, c]`` with the residuals measured at construction.

    Attributes:
        b: First commutator factor.
        c: Second commutator factor.
        target: The matrix the factorization certifies.
        residual_op: Operator norm of ``target - [b, c]``.
        residual_l2: Normalized L2 norm of ``target - [b, c]``.
        norm_product: ``||b|| * ||c||`` (reported, not bounded).
        method: Construction used.
        certificate: Rearrangement certificate, for the spectral methods.
    """

    b: ComplexMatrix
    c: ComplexMatrix
    target: ComplexMatrix
    residual_op: float
    residual_l2: float
    norm_product: float
    method: Method
    certificate: RearrangementCertificate | None = None

    @classmethod
    def from_pair(
        cls,
        target: ComplexMatrix,
        b: ComplexMatrix,
        c: ComplexMatrix,
        method: Method,
        certificate: RearrangementCertificate | None = None,
    ) -> "Factorization":
        """Build the record, measuring residuals from ``(target, b, c)``."""
        difference = target - commutator(b, c)
        return cls(
            b=b,
            c=c,
            target=target,
            residual_op=operator_norm(difference),
            residual_l2=l2_norm(difference),
            norm_product=operator_norm(b) * operator_norm(c),
            method=method,
            certificate=certificate,
        )

    @classmethod
    def zero(cls, n: int, method: Method) -> "Factorization":
        """The trivial factorization ``0 = [0, 0]``."""
        zeros = np.zeros((n, n), dtype=np.complex128)
        return cls.from_pair(zeros, zeros.copy(), zeros.copy(), method)

    @property
    def n(self) -> int:
        return self.b.shape[0]
