"""Exception hierarchy for commutator-lab."""


class CommutatorLabError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(CommutatorLabError, ValueError):
    """Operands have incompatible shapes."""


class TraceNotZero(CommutatorLabError, ValueError):
    """Input trace is too large to be centered."""

    def __init__(self, trace: complex, threshold: float) -> None:
        self.trace = trace
        self.threshold = threshold
        super().__init__(f"normalized trace {trace:.3e} exceeds threshold {threshold:.3e}")


class NormalityViolation(CommutatorLabError, ValueError):
    """Input is not normal within tolerance."""

    def __init__(self, defect: float, threshold: float) -> None:
        self.defect = defect
        self.threshold = threshold
        super().__init__(f"normality defect {defect:.3e} exceeds threshold {threshold:.3e}")


class NilpotencyViolation(CommutatorLabError, ValueError):
    """Input is not nilpotent within tolerance."""

    def __init__(self, eigenvalue: complex, message: str | None = None) -> None:
        self.eigenvalue = eigenvalue
        super().__init__(message or f"non-negligible eigenvalue {eigenvalue:.3e}")


class RankDegeneracy(CommutatorLabError, ValueError):
    """A numerical rank decision is ambiguous."""

    def __init__(self, gap: float, message: str) -> None:
        self.gap = gap
        super().__init__(f"{message} (singular value gap ratio {gap:.3g})")


class NonConvergence(CommutatorLabError, ArithmeticError):
    """An iteration hit its cap before converging."""

    def __init__(self, best_estimate: float, iterations: int, message: str = "iteration did not converge") -> None:
        self.best_estimate = best_estimate
        self.iterations = iterations
        super().__init__(f"{message} after {iterations} iterations (best estimate {best_estimate:.6g})")


class SumNotZero(CommutatorLabError, ValueError):
    """A tuple that must sum to zero does not."""

    def __init__(self, total: complex, threshold: float) -> None:
        self.total = total
        self.threshold = threshold
        super().__init__(f"sum {total:.3e} exceeds zero-sum threshold {threshold:.3e}")


class CapExceeded(CommutatorLabError, ValueError):
    """Input length exceeds the exhaustive search cap."""

    def __init__(self, length: int, cap: int) -> None:
        self.length = length
        self.cap = cap
        super().__init__(f"length {length} exceeds exhaustive cap {cap}")


class NotStrictlyUpperTriangular(CommutatorLabError, ValueError):
    """Input has nonzero entries on or below the diagonal."""


class CoefficientMismatch(CommutatorLabError, ValueError):
    """Coefficient sequences violate a_n = b_n * c_n."""

    def __init__(self, defect: float) -> None:
        self.defect = defect
        super().__init__(f"coefficients violate a = b*c by {defect:.3e}")


class EigenvalueDegenerate(CommutatorLabError, ValueError):
    """The chosen eigenfunction has eigenvalue 1."""

    def __init__(self, zeta: complex) -> None:
        self.zeta = zeta
        super().__init__(f"eigenvalue {zeta:.6g} equals 1; h - h∘α⁻¹ is not invertible")


class NoAdmissibleEigenvalue(CommutatorLabError, ValueError):
    """No eigenvalue of the finite system avoids every requested power."""


class MatrixFormatError(CommutatorLabError, ValueError):
    """Malformed matrix file."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None) -> None:
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


class SuiteConfigError(CommutatorLabError, ValueError):
    """Unknown suite or a configuration exceeding resource caps."""


class CertificateViolation(CommutatorLabError, ArithmeticError):
    """A numerical certificate failed its own consistency check."""
