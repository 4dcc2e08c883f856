"""Verification reports and seeded experiment suites.

``verify`` recomputes every figure of merit of a factorization from the
input matrix and the two factors alone. ``run_suite`` runs a named sweep of
seeded cases in parallel and writes a report bundle: one JSON record per
case (``reports.jsonl``), a Markdown summary normalized by ``mdformat``
(``summary.md``) and a header holding the run metadata (``header.json``).
The timestamp lives only in the header, so the first two files are
byte-identical across runs with the same configuration.
"""

import json
import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import partial
from pathlib import Path

import mdformat
import numpy as np
import numpy.typing as npt

from commutator_lab import ergodic, nilfact, normalfact, shoda, steinitz, tucci
from commutator_lab.config import Tolerances, get_thread_count, resolve_tolerances
from commutator_lab.exceptions import (
    CertificateViolation,
    CommutatorLabError,
    DimensionMismatch,
    NoAdmissibleEigenvalue,
    NonConvergence,
    SuiteConfigError,
)
from commutator_lab.factorization import Factorization, Method
from commutator_lab.matcore import (
    as_matrix,
    commutator,
    l2_norm,
    normalized_trace,
    operator_norm,
    random_nilpotent,
    random_normal_traceless,
    random_strictly_upper,
    random_traceless,
)

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NONCONVERGENCE = 3

SUITES = ("normal", "nilpotent", "shoda", "steinitz", "tucci", "ergodic")
MAX_DIM_CAP = 256
MAX_CASES = 500
SQRT5_HALF = math.sqrt(5) / 2
# Depth of the matrix-free certificate case, run when max_dim reaches it
MATRIX_FREE_DEPTH = 16


@dataclass(frozen=True)
class VerificationReport:
    """Figures of merit of ``a ~= [b, c]``, all recomputed from ``(a, b, c)``."""

    input_norm: float
    residual_op: float
    residual_l2: float
    residual_rel: float
    norm_b: float
    norm_c: float
    norm_product: float
    trace_of_input: complex
    method: Method
    certificate: dict[str, object] | None
    passed: bool

    def to_record(self) -> dict[str, object]:
        return {
            "input_norm": self.input_norm,
            "residual_op": self.residual_op,
            "residual_l2": self.residual_l2,
            "residual_rel": self.residual_rel,
            "norm_b": self.norm_b,
            "norm_c": self.norm_c,
            "norm_product": self.norm_product,
            "trace_of_input": [self.trace_of_input.real, self.trace_of_input.imag],
            "method": self.method.value,
            "certificate": self.certificate,
            "pass": self.passed,
        }


def acceptance_threshold(method: Method, tol: Tolerances) -> float:
    """Relative residual accepted for ``method``."""
    return tol.exact_residual_rel if method.exact else tol.residual_rel


def verify(
    a: npt.ArrayLike,
    f: Factorization,
    tol: Tolerances | None = None,
    threshold: float | None = None,
) -> VerificationReport:
    """Check ``a = [f.b, f.c]`` independently of the factorizer's bookkeeping.

    Passes when ``||a - [b, c]|| / ||a||`` is within the method's threshold
    (or ``threshold``) and ``|tau(a)| <= residual_rel * ||a||``.

    Raises:
        DimensionMismatch: ``a`` and the factors differ in shape.
    """
    tol = resolve_tolerances(tol)
    a = as_matrix(a)
    if f.b.shape != a.shape or f.c.shape != a.shape:
        raise DimensionMismatch(f"input {a.shape} vs factors {f.b.shape}, {f.c.shape}")
    difference = a - commutator(f.b, f.c)
    input_norm = operator_norm(a)
    residual_op = operator_norm(difference)
    if input_norm > 0:
        residual_rel = residual_op / input_norm
    else:
        residual_rel = 0.0 if residual_op == 0 else math.inf
    norm_b, norm_c = operator_norm(f.b), operator_norm(f.c)
    trace = normalized_trace(a)
    limit = acceptance_threshold(f.method, tol) if threshold is None else threshold
    passed = residual_rel <= limit and abs(trace) <= tol.residual_rel * input_norm
    return VerificationReport(
        input_norm=input_norm,
        residual_op=residual_op,
        residual_l2=l2_norm(difference),
        residual_rel=residual_rel,
        norm_b=norm_b,
        norm_c=norm_c,
        norm_product=norm_b * norm_c,
        trace_of_input=trace,
        method=f.method,
        certificate=None if f.certificate is None else f.certificate.summary(),
        passed=passed,
    )


@dataclass(frozen=True)
class SuiteConfig:
    """A named sweep.

    Attributes:
        name: One of ``SUITES`` or ``"all"``.
        seed: Master seed; each case gets a child seed spawned from it.
        max_dim: Largest matrix dimension used by random cases.
        output_dir: Where to write the report bundle (nothing written if None).
        case_count: Random cases per family.
    """

    name: str
    seed: int = 7
    max_dim: int = 16
    output_dir: Path | None = None
    case_count: int = 12

    def __post_init__(self) -> None:
        if self.name not in SUITES and self.name != "all":
            raise SuiteConfigError(f"unknown suite {self.name!r}; choose from {', '.join(SUITES)} or all")
        if not 2 <= self.max_dim <= MAX_DIM_CAP:
            raise SuiteConfigError(f"max_dim must lie in 2..{MAX_DIM_CAP}, got {self.max_dim}")
        if not 1 <= self.case_count <= MAX_CASES:
            raise SuiteConfigError(f"case_count must lie in 1..{MAX_CASES}, got {self.case_count}")
        if self.seed < 0:
            raise SuiteConfigError("seed must be non-negative")

    @property
    def suites(self) -> tuple[str, ...]:
        return SUITES if self.name == "all" else (self.name,)

    def dims(self, start: int = 2) -> list[int]:
        """``case_count`` sizes spread evenly over ``start..max_dim``, both ends included."""
        if self.case_count == 1:
            return [self.max_dim]
        spread = np.linspace(start, self.max_dim, self.case_count)
        return [int(n) for n in np.rint(spread)]


@dataclass
class CaseRecord:
    """Outcome of one suite case."""

    suite: str
    case: str
    status: str = "pass"
    report: VerificationReport | None = None
    checks: dict[str, bool] = field(default_factory=dict)
    metrics: dict[str, float] = field(default_factory=dict)
    message: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def settle(self) -> "CaseRecord":
        report_ok = self.report is None or self.report.passed
        if self.status == "pass" and not (report_ok and all(self.checks.values())):
            self.status = "fail"
        return self

    def to_record(self) -> dict[str, object]:
        record: dict[str, object] = {
            "suite": self.suite,
            "case": self.case,
            "kind": "check" if self.report is None else "factorization",
            "status": self.status,
            "checks": self.checks,
        }
        if self.report is not None:
            record.update(self.report.to_record())
        else:
            record["metrics"] = self.metrics
        record["pass"] = self.passed
        if self.message:
            record["message"] = self.message
        return record


CaseRunner = Callable[[np.random.Generator, Tolerances], CaseRecord]


@dataclass(frozen=True)
class SuiteCase:
    suite: str
    name: str
    run: CaseRunner


def _same_multiset(x: npt.ArrayLike, y: npt.ArrayLike, tol: float) -> bool:
    remaining = list(np.asarray(y, dtype=np.complex128))
    for value in np.asarray(x, dtype=np.complex128):
        if not remaining:
            return False
        distances = [abs(value - other) for other in remaining]
        best = int(np.argmin(distances))
        if distances[best] > tol:
            return False
        remaining.pop(best)
    return not remaining


def _factorization_case(
    suite: str, name: str, a: npt.ArrayLike, f: Factorization, tol: Tolerances, **checks: bool
) -> CaseRecord:
    report = verify(a, f, tol)
    trace_ok = abs(normalized_trace(commutator(f.b, f.c))) <= 1e-12 * max(report.norm_product, 1e-300)
    return CaseRecord(suite, name, report=report, checks={"commutator_trace": trace_ok, **checks})


def _oracle_ok(a: npt.ArrayLike, tol: Tolerances) -> bool:
    baseline = shoda.factor_traceless(a, tol)
    return baseline.residual_op <= 1e-8 * operator_norm(a)


# normal ----------------------------------------------------------------------


def _random_normal(n: int, rng: np.random.Generator, tol: Tolerances) -> CaseRecord:
    a = random_normal_traceless(n, rng)
    f = normalfact.factor_normal(a, tol)
    scale = operator_norm(a)
    checks = {
        "norm_product_within_2": f.norm_product <= 2 * scale + 1e-8,
        "b_contraction": operator_norm(f.b) <= 1 + 1e-12,
        "oracle": _oracle_ok(a, tol),
    }
    if n <= normalfact.EXHAUSTIVE_LIMIT:
        checks["norm_product_within_sqrt5_half"] = f.norm_product <= SQRT5_HALF * scale + 1e-9
    return _factorization_case("normal", f"random-normal-n{n}", a, f, tol, **checks)


def _centered_projection(n: int, k: int, rng: np.random.Generator, tol: Tolerances) -> CaseRecord:
    a = normalfact.centered_projection(n, k)
    return _factorization_case("normal", f"centered-projection-{n}-{k}", a, normalfact.factor_normal(a, tol), tol)


def _distribution(
    label: str, mu: normalfact.DiscreteMeasure, n: int, rng: np.random.Generator, tol: Tolerances
) -> CaseRecord:
    realization = normalfact.realize_distribution(mu, n)
    f = realization.factorization
    spectrum = np.linalg.eigvals(commutator(f.b, f.c))
    expected = np.repeat(np.asarray(mu.atoms, dtype=np.complex128), realization.counts)
    certificate = realization.certificate
    checks = {
        "spectrum_matches_atoms": _same_multiset(spectrum, expected, 1e-10),
        "sup_norm_within_sqrt5_half": certificate is not None
        and certificate.prefix_max <= SQRT5_HALF * mu.max_modulus + 1e-12,
        "b_unitary": bool(np.allclose(f.b.conj().T @ f.b, np.eye(n), atol=1e-12)),
    }
    return _factorization_case("normal", f"distribution-{label}-n{n}", f.target, f, tol, **checks)


def _normal_cases(cfg: SuiteConfig) -> list[SuiteCase]:
    cases = [SuiteCase("normal", f"random-normal-{i}", partial(_random_normal, n)) for i, n in enumerate(cfg.dims())]
    cases += [SuiteCase("normal", f"centered-projection-{n}-{k}", partial(_centered_projection, n, k)) for n, k in ((3, 1), (5, 2))]
    two_point = normalfact.DiscreteMeasure((1, -1), (0.5, 0.5))
    roots = normalfact.DiscreteMeasure((1, 1j, -1, -1j), (0.25, 0.25, 0.25, 0.25))
    cases += [
        SuiteCase("normal", "distribution-two-point", partial(_distribution, "two-point", two_point, 8)),
        SuiteCase("normal", "distribution-fourth-roots", partial(_distribution, "fourth-roots", roots, 8)),
    ]
    return cases


# nilpotent -------------------------------------------------------------------


def _strict_upper(n: int, rng: np.random.Generator, tol: Tolerances) -> CaseRecord:
    a = random_strictly_upper(n, rng)
    f = nilfact.strict_triangular_factor(a)
    checks = {"exact_recurrence": f.residual_op <= 1e-10 * operator_norm(a)}
    return _factorization_case("nilpotent", f"strict-upper-n{n}", a, f, tol, **checks)


def _nilpotent_pipeline(n: int, rng: np.random.Generator, tol: Tolerances) -> CaseRecord:
    t = random_nilpotent(n, rng)
    f = nilfact.factor_nilpotent(t, tol)
    checks = {
        "pipeline_residual": f.residual_op <= 1e-7 * operator_norm(t),
        "b_contraction": operator_norm(f.b) <= 1 + 1e-12,
        "oracle": _oracle_ok(t, tol),
    }
    return _factorization_case("nilpotent", f"pipeline-n{n}", t, f, tol, **checks)


def jordan(*sizes: int) -> npt.NDArray[np.complex128]:
    """Direct sum of nilpotent Jordan blocks of the given sizes."""
    n = sum(sizes)
    t = np.zeros((n, n), dtype=np.complex128)
    start = 0
    for size in sizes:
        for i in range(start, start + size - 1):
            t[i, i + 1] = 1
        start += size
    return t


def _flag_case(sizes: tuple[int, ...], expected: tuple[int, ...], rng: np.random.Generator, tol: Tolerances) -> CaseRecord:
    t = jordan(*sizes)
    decomposition = nilfact.flag_decomposition(t, tol)
    f = nilfact.factor_nilpotent(t, tol, path=nilfact.NilpotentPath.FLAG)
    checks = {"block_sizes": decomposition.block_sizes == expected}
    name = "flag-J" + "+J".join(str(s) for s in sizes)
    return _factorization_case("nilpotent", name, t, f, tol, **checks)


def _nilpotent_cases(cfg: SuiteConfig) -> list[SuiteCase]:
    cases = [SuiteCase("nilpotent", f"strict-upper-{i}", partial(_strict_upper, n)) for i, n in enumerate(cfg.dims())]
    cases += [SuiteCase("nilpotent", f"pipeline-{i}", partial(_nilpotent_pipeline, n)) for i, n in enumerate(cfg.dims())]
    for sizes, expected in (((3,), (3,)), ((2, 2), (2,)), ((3, 1), (3, 1))):
        cases.append(SuiteCase("nilpotent", f"flag-{sizes}", partial(_flag_case, sizes, expected)))
    return cases


# shoda -----------------------------------------------------------------------


def _random_traceless(n: int, rng: np.random.Generator, tol: Tolerances) -> CaseRecord:
    a = random_traceless(n, rng)
    return _factorization_case("shoda", f"random-traceless-n{n}", a, shoda.factor_traceless(a, tol), tol)


def _shoda_fixed(label: str, a: npt.NDArray[np.complex128], rng: np.random.Generator, tol: Tolerances) -> CaseRecord:
    return _factorization_case("shoda", label, a, shoda.factor_traceless(a, tol), tol)


def _shoda_cases(cfg: SuiteConfig) -> list[SuiteCase]:
    cases = [SuiteCase("shoda", f"random-traceless-{i}", partial(_random_traceless, n)) for i, n in enumerate(cfg.dims())]
    cases.append(SuiteCase("shoda", "diag-1-minus-1", partial(_shoda_fixed, "diag-1-minus-1", np.diag([1.0, -1.0]).astype(np.complex128))))
    cases.append(SuiteCase("shoda", "zero-3", partial(_shoda_fixed, "zero-3", np.zeros((3, 3), dtype=np.complex128))))
    return cases


# steinitz --------------------------------------------------------------------


def _valid(certificate: steinitz.RearrangementCertificate) -> bool:
    try:
        certificate.validate()
    except CertificateViolation:
        return False
    return True


def _zero_sum_tuple(n: int, rng: np.random.Generator, tol: Tolerances) -> CaseRecord:
    values = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    values -= values.mean()
    best = steinitz.exhaustive_best_order(values)
    greedy = steinitz.greedy_order(values)
    modulus = best.max_modulus
    checks = {
        "certificates_valid": _valid(best) and _valid(greedy),
        "optimum_within_sqrt5_half": best.prefix_max <= SQRT5_HALF * modulus + 1e-12,
        "greedy_within_2": greedy.prefix_max <= 2 * modulus + 1e-12,
        "optimum_not_above_greedy": best.prefix_max <= greedy.prefix_max + 1e-12,
    }
    metrics = {"optimal_ratio": best.ratio, "greedy_ratio": greedy.ratio}
    return CaseRecord("steinitz", f"zero-sum-n{n}", checks=checks, metrics=metrics)


def _steinitz_cases(cfg: SuiteConfig) -> list[SuiteCase]:
    dims = cfg.dims()
    return [SuiteCase("steinitz", f"zero-sum-{i}", partial(_zero_sum_tuple, min(n, 8))) for i, n in enumerate(dims)]


# tucci -----------------------------------------------------------------------


def _tucci_identity(depth: int, rng: np.random.Generator, tol: Tolerances) -> CaseRecord:
    cfg = tucci.TucciConfig.power_law(3, depth)
    report = tucci.tucci_commutator_identity(cfg)
    checks = {"identity_residual": report.residual_op <= 1e-12}
    metrics = {"residual_op": report.residual_op, "residual_l2": report.residual_l2}
    return CaseRecord("tucci", f"identity-N{depth}", checks=checks, metrics=metrics)


def _tucci_leg_relations(depth: int, rng: np.random.Generator, tol: Tolerances) -> CaseRecord:
    ok = True
    for m in range(1, depth + 1):
        projection = tucci.build_B(np.eye(depth)[m - 1], depth).to_dense()
        for n in range(1, depth + 1):
            v = tucci.build_V(n, depth).to_dense()
            expected = v if m == n else np.zeros_like(v)
            ok &= bool(np.array_equal(commutator(projection, v), expected))
    return CaseRecord("tucci", f"leg-relations-N{depth}", checks={"per_leg_algebra": ok})


def _tucci_flat_and_l2(depth: int, rng: np.random.Generator, tol: Tolerances) -> CaseRecord:
    expectations = [tucci.flat_vector_expectation(k, depth) for k in range(1, depth + 1)]
    b = rng.standard_normal(depth) + 1j * rng.standard_normal(depth)
    legs = [n for n in range(1, depth + 1) if rng.random() < 0.6] or [1]
    lhs, rhs = tucci.b_l2_formula_check(b, legs, depth)
    checks = {
        "flat_expectation_half": all(abs(value - 0.5) <= 1e-14 for value in expectations),
        "l2_formula": abs(lhs - rhs) <= 1e-12 * max(1.0, rhs),
    }
    return CaseRecord("tucci", f"flat-and-l2-N{depth}", checks=checks, metrics={"l2_lhs": lhs, "l2_rhs": rhs})


def _tucci_certificates(max_depth: int, rng: np.random.Generator, tol: Tolerances) -> CaseRecord:
    lowers, holds = [], True
    for depth in range(1, max_depth + 1):
        c = np.arange(1, depth + 1, dtype=float) ** -0.75
        result = tucci.c_lower_bound_certificate(c, depth, allow_unconverged=True)
        lowers.append(result.lower)
        holds &= result.holds
    increasing = all(later > earlier for earlier, later in zip(lowers, lowers[1:]))
    return CaseRecord(
        "tucci",
        f"c-lower-bound-N1-{max_depth}",
        checks={"certificate_holds": holds, "lower_strictly_increasing": increasing},
        metrics={"lower_at_max_depth": lowers[-1]},
    )


def _tucci_matrix_free_certificate(depth: int, rng: np.random.Generator, tol: Tolerances) -> CaseRecord:
    c = np.arange(1, depth + 1, dtype=float) ** -0.75
    result = tucci.c_lower_bound_certificate(c, depth, mode=tucci.TucciMode.MATRIX_FREE, allow_unconverged=True)
    return CaseRecord(
        "tucci",
        f"c-lower-bound-matrix-free-N{depth}",
        checks={"certificate_holds": result.holds},
        metrics={"lower": result.lower, "norm_estimate": result.norm_estimate, "converged": float(result.converged)},
    )


def _tucci_scan(max_depth: int, rng: np.random.Generator, tol: Tolerances) -> CaseRecord:
    depths = list(range(1, max_depth + 1))
    rows = tucci.norm_scan(1.5, depths)
    lowers = [row.lower for row in rows]
    checks = {
        "rows_in_order": [row.depth for row in rows] == depths,
        "lower_strictly_increasing": all(later > earlier for earlier, later in zip(lowers, lowers[1:])),
        "lower_below_norm": all(row.lower <= row.norm_c + tucci.CERTIFY_SLACK for row in rows),
        "identity_residual": all(row.residual <= 1e-12 for row in rows),
    }
    return CaseRecord("tucci", f"scan-N1-{max_depth}", checks=checks, metrics={"norm_c_at_max_depth": rows[-1].norm_c})


def _tucci_conditional(depth: int, rng: np.random.Generator, tol: Tolerances) -> CaseRecord:
    b = rng.standard_normal(depth) + 1j * rng.standard_normal(depth)
    legs = [n for n in range(1, depth + 1) if rng.random() < 0.5]
    y = complex(rng.standard_normal(), rng.standard_normal())
    report = tucci.conditional_projection_check(b, legs, y, depth)
    checks = {
        "projection_residual": report.residual <= 1e-6 * max(1.0, abs(report.expected)),
        "observed_matches_expected": abs(report.observed - report.expected) <= 1e-10 * max(1.0, abs(report.expected)),
    }
    return CaseRecord("tucci", f"conditional-N{depth}", checks=checks, metrics={"residual": report.residual})


def _tucci_nilpotent(depth: int, rng: np.random.Generator, tol: Tolerances) -> CaseRecord:
    a = tucci.build_A(np.arange(1, depth + 1, dtype=float) ** -3, depth).to_dense()
    f = nilfact.factor_nilpotent(a, tol)
    return _factorization_case("tucci", f"A-nilpotent-N{depth}", a, f, tol)


def _tucci_cases(cfg: SuiteConfig) -> list[SuiteCase]:
    top = min(8, max(2, cfg.max_dim // 2))
    cases = [SuiteCase("tucci", f"identity-N{d}", partial(_tucci_identity, d)) for d in range(1, top + 1)]
    cases += [
        SuiteCase("tucci", "leg-relations-N4", partial(_tucci_leg_relations, 4)),
        SuiteCase("tucci", "flat-and-l2-N6", partial(_tucci_flat_and_l2, 6)),
        SuiteCase("tucci", "c-lower-bound", partial(_tucci_certificates, min(10, top + 2))),
        SuiteCase("tucci", "A-nilpotent-N3", partial(_tucci_nilpotent, 3)),
        SuiteCase("tucci", f"scan-N1-{min(4, top)}", partial(_tucci_scan, min(4, top))),
        SuiteCase("tucci", "conditional-N5", partial(_tucci_conditional, 5)),
    ]
    if cfg.max_dim >= MATRIX_FREE_DEPTH:
        name = f"c-lower-bound-matrix-free-N{MATRIX_FREE_DEPTH}"
        cases.append(SuiteCase("tucci", name, partial(_tucci_matrix_free_certificate, MATRIX_FREE_DEPTH)))
    return cases


# ergodic ---------------------------------------------------------------------


def _random_function(n: int, rng: np.random.Generator) -> npt.NDArray[np.complex128]:
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def _ergodic_covariance(n: int, rng: np.random.Generator, tol: Tolerances) -> CaseRecord:
    system = ergodic.CyclicSystem(n, 1 + int(rng.integers(n - 1)))
    residual = ergodic.covariance_residual(_random_function(n, rng), system)
    return CaseRecord("ergodic", f"covariance-N{n}", checks={"covariance": residual <= 1e-12}, metrics={"residual": residual})


def _ergodic_single(n: int, rng: np.random.Generator, tol: Tolerances) -> CaseRecord:
    system = ergodic.CyclicSystem(n, 1)
    f = ergodic.single_term_factor(_random_function(n, rng), 1, system)
    return _factorization_case("ergodic", f"single-term-N{n}", f.target, f, tol, c_unitary_norm=abs(operator_norm(f.c) - 1) <= 1e-12)


def _ergodic_multi(n: int, powers: tuple[int, ...], rng: np.random.Generator, tol: Tolerances) -> CaseRecord:
    system = ergodic.CyclicSystem(n, 1)
    fs = {k: _random_function(n, rng) for k in powers}
    f = ergodic.multi_term_factor(powers, fs, system)
    return _factorization_case("ergodic", f"multi-term-N{n}", f.target, f, tol)


def _ergodic_no_eigenvalue(rng: np.random.Generator, tol: Tolerances) -> CaseRecord:
    system = ergodic.CyclicSystem(4, 1)
    powers = (1, 2, 3, 4)
    try:
        ergodic.multi_term_factor(powers, {k: np.ones(4) for k in powers}, system)
    except NoAdmissibleEigenvalue:
        rejected = True
    else:
        rejected = False
    return CaseRecord("ergodic", "no-admissible-eigenvalue-N4", checks={"rejected": rejected})


def _ergodic_coboundary(rng: np.random.Generator, tol: Tolerances) -> CaseRecord:
    values = np.array([1, 1j, -1, -1j], dtype=np.complex128)
    realization = ergodic.coboundary_realization(values)
    system = realization.system
    coboundary = realization.f - system.act(realization.f, -1)
    checks = {
        "coboundary_values": bool(np.allclose(coboundary, realization.values, atol=1e-12)),
        "sup_norm_within_sqrt5_half": realization.sup_norm <= SQRT5_HALF + 1e-12,
    }
    return CaseRecord("ergodic", "coboundary-fourth-roots", checks=checks, metrics={"sup_norm": realization.sup_norm})


def _ergodic_cases(cfg: SuiteConfig) -> list[SuiteCase]:
    sizes = [min(256, 4 * n) for n in cfg.dims(start=2)]
    cases = [SuiteCase("ergodic", f"covariance-{i}", partial(_ergodic_covariance, n)) for i, n in enumerate(sizes)]
    cases += [SuiteCase("ergodic", f"single-term-{i}", partial(_ergodic_single, n)) for i, n in enumerate(sizes)]
    cases += [
        SuiteCase("ergodic", "multi-term-N8", partial(_ergodic_multi, 8, (1, 2, 3))),
        SuiteCase("ergodic", "no-admissible-eigenvalue-N4", _ergodic_no_eigenvalue),
        SuiteCase("ergodic", "coboundary-fourth-roots", _ergodic_coboundary),
    ]
    return cases


CASE_BUILDERS: dict[str, Callable[[SuiteConfig], list[SuiteCase]]] = {
    "normal": _normal_cases,
    "nilpotent": _nilpotent_cases,
    "shoda": _shoda_cases,
    "steinitz": _steinitz_cases,
    "tucci": _tucci_cases,
    "ergodic": _ergodic_cases,
}


def build_cases(cfg: SuiteConfig) -> list[SuiteCase]:
    cases: list[SuiteCase] = []
    for suite in cfg.suites:
        cases.extend(CASE_BUILDERS[suite](cfg))
    return cases


def _run_case(case: SuiteCase, seed: np.random.SeedSequence, tol: Tolerances) -> CaseRecord:
    rng = np.random.default_rng(seed)
    try:
        record = case.run(rng, tol)
    except NonConvergence as err:
        logger.warning("case %s/%s did not converge: %s", case.suite, case.name, err)
        return CaseRecord(case.suite, case.name, status="nonconvergence", message=str(err))
    except CommutatorLabError as err:
        logger.warning("case %s/%s failed: %s", case.suite, case.name, err)
        return CaseRecord(case.suite, case.name, status="error", message=str(err))
    record.case = case.name
    return record.settle()


@dataclass
class SuiteResult:
    config: SuiteConfig
    records: list[CaseRecord]
    header: dict[str, object]

    @property
    def exit_code(self) -> int:
        if any(r.status == "nonconvergence" for r in self.records):
            return EXIT_NONCONVERGENCE
        if any(not r.passed for r in self.records):
            return EXIT_FAIL
        return EXIT_PASS

    def reports_jsonl(self) -> str:
        return "".join(json.dumps(r.to_record(), sort_keys=True) + "\n" for r in self.records)

    def summary_markdown(self) -> str:
        return render_summary(self.config, self.records)


def render_summary(cfg: SuiteConfig, records: Sequence[CaseRecord]) -> str:
    """Markdown summary of a run, normalized by ``mdformat``."""
    passed = sum(r.passed for r in records)
    lines = [
        f"# Suite `{cfg.name}`",
        "",
        f"Seed {cfg.seed}, max dimension {cfg.max_dim}: {passed} of {len(records)} cases passed.",
    ]
    for suite in cfg.suites:
        lines += ["", f"## {suite}", ""]
        for record in (r for r in records if r.suite == suite):
            detail = ""
            if record.report is not None:
                detail = f" (relative residual {record.report.residual_rel:.3e})"
            failed = [name for name, ok in record.checks.items() if not ok]
            if failed:
                detail += f", failed checks: {', '.join(failed)}"
            if record.message:
                detail += f", {record.message}"
            lines.append(f"* `{record.case}`: {record.status}{detail}")
    return mdformat.text("\n".join(lines) + "\n")


def write_bundle(result: SuiteResult, output_dir: Path) -> None:
    output_dir.mkdir(parents=True, exist_ok=True)
    (output_dir / "reports.jsonl").write_text(result.reports_jsonl(), encoding="utf-8")
    (output_dir / "summary.md").write_text(result.summary_markdown(), encoding="utf-8")
    (output_dir / "header.json").write_text(json.dumps(result.header, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def run_suite(cfg: SuiteConfig, tol: Tolerances | None = None) -> SuiteResult:
    """Run every case of the configured suite(s).

    Cases run on a thread pool with per-case seeds spawned from the master
    seed; records keep case order regardless of completion order.
    """
    from commutator_lab import __version__

    tol = resolve_tolerances(tol)
    cases = build_cases(cfg)
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(cases))
    logger.info("running %d cases of suite %s with seed %d", len(cases), cfg.name, cfg.seed)
    with ThreadPoolExecutor(max_workers=get_thread_count()) as pool:
        records = list(pool.map(_run_case, cases, seeds, [tol] * len(cases)))
    header = {
        "suite": cfg.name,
        "seed": cfg.seed,
        "max_dim": cfg.max_dim,
        "case_count": cfg.case_count,
        "cases": len(records),
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    result = SuiteResult(cfg, records, header)
    if cfg.output_dir is not None:
        write_bundle(result, Path(cfg.output_dir))
    logger.info("suite %s finished with exit code %d", cfg.name, result.exit_code)
    return result
