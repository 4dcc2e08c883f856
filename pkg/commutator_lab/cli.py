"""Command-line entry point: ``commutator-lab``.

Exit codes: 0 on success, 1 when a verification fails, 2 for usage errors
and rejected input, 3 when an iteration did not converge.
"""

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from dataclasses import replace
from pathlib import Path

import numpy as np

from commutator_lab import __version__, ergodic, nilfact, normalfact, shoda, steinitz, tucci
from commutator_lab.config import Tolerances, get_tolerances, set_thread_count, tolerance_context
from commutator_lab.exceptions import (
    CertificateViolation,
    CommutatorLabError,
    NilpotencyViolation,
    NonConvergence,
    NormalityViolation,
)
from commutator_lab.factorization import Factorization
from commutator_lab.harness import (
    EXIT_FAIL,
    EXIT_NONCONVERGENCE,
    EXIT_PASS,
    EXIT_USAGE,
    SUITES,
    SuiteConfig,
    run_suite,
    verify,
)
from commutator_lab.matrixio import parse_matrix, parse_values, write_matrix

logger = logging.getLogger(__name__)

FACTOR_METHODS = ("auto", "normal", "nilpotent", "flag", "shoda")


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _emit(document: object) -> None:
    print(json.dumps(document, indent=2, sort_keys=True))


def _depths(text: str) -> list[int]:
    """``"1-12"`` or ``"1,2,4"``."""
    try:
        if "-" in text:
            low, high = (int(part) for part in text.split("-", 1))
            depths = list(range(low, high + 1))
        else:
            depths = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid depth list {text!r}") from None
    if not depths or min(depths) < 1:
        raise argparse.ArgumentTypeError(f"depths must be positive, got {text!r}")
    return depths


def _powers(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid power list {text!r}") from None


def _factor_auto(a: np.ndarray, tol: Tolerances) -> Factorization:
    try:
        return normalfact.factor_normal(a, tol)
    except NormalityViolation:
        logger.info("input is not normal; trying the nilpotent path")
    try:
        return nilfact.factor_nilpotent(a, tol)
    except NilpotencyViolation:
        logger.info("input is not nilpotent; falling back to the baseline factorization")
    return shoda.factor_traceless(a, tol)


def _factor(args: argparse.Namespace, tol: Tolerances) -> int:
    a = parse_matrix(args.input)
    if args.method == "auto":
        f = _factor_auto(a, tol)
    elif args.method == "normal":
        f = normalfact.factor_normal(a, tol)
    elif args.method in ("nilpotent", "flag"):
        path = nilfact.NilpotentPath.FLAG if args.method == "flag" else nilfact.NilpotentPath.SCHUR
        f = nilfact.factor_nilpotent(a, tol, path=path)
    else:
        f = shoda.factor_traceless(a, tol)

    if args.out_b:
        write_matrix(f.b, args.out_b)
    if args.out_c:
        write_matrix(f.c, args.out_c)
    report = verify(f.target, f, tol)
    record = report.to_record()
    if args.report:
        Path(args.report).write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    else:
        _emit(record)
    return EXIT_PASS if report.passed else EXIT_FAIL


def _steinitz(args: argparse.Namespace, tol: Tolerances) -> int:
    values = parse_values(args.values)
    if args.mode == "exhaustive":
        certificate = steinitz.exhaustive_best_order(values)
    elif args.mode == "greedy":
        certificate = steinitz.greedy_order(values, restarts=args.restarts, seed=args.seed)
    else:
        certificate = steinitz.rearrange(values)
    certificate.validate()
    document = certificate.summary()
    document["ordered_values"] = [[z.real, z.imag] for z in certificate.ordered_values.tolist()]
    _emit(document)
    return EXIT_FAIL if certificate.bound_class is steinitz.BoundClass.UNBOUNDED else EXIT_PASS


def _tucci(args: argparse.Namespace, tol: Tolerances) -> int:
    mode = tucci.TucciMode(args.mode) if args.mode else None
    if args.action == "identity":
        cfg = tucci.TucciConfig.power_law(args.r, args.depth, mode or tucci.TucciMode.DENSE)
        report = tucci.tucci_commutator_identity(cfg)
        passed = report.residual_op <= tol.exact_residual_rel * max(1.0, float(np.sum(np.abs(cfg.a))))
        _emit(
            {
                "depth": report.depth,
                "mode": report.mode.value,
                "residual_op": report.residual_op,
                "residual_l2": report.residual_l2,
                "coefficient_defect": report.coefficient_defect,
                "pass": passed,
            }
        )
        return EXIT_PASS if passed else EXIT_FAIL
    if args.action == "certify":
        cfg = tucci.TucciConfig.power_law(args.r, args.depth)
        result = tucci.c_lower_bound_certificate(cfg.c, args.depth, mode=mode)
        _emit({"depth": args.depth, "lower": result.lower, "norm_estimate": result.norm_estimate, "pass": result.holds})
        return EXIT_PASS
    rows = tucci.norm_scan(args.r, args.depths, mode=mode)
    tucci.write_scan_csv(rows, args.out if args.out else sys.stdout)
    return EXIT_PASS


def _ergodic(args: argparse.Namespace, tol: Tolerances) -> int:
    system = ergodic.CyclicSystem(args.points, args.step)
    rng = np.random.default_rng(args.seed)
    fs = {k: rng.standard_normal(args.points) + 1j * rng.standard_normal(args.points) for k in args.terms}
    f = ergodic.multi_term_factor(args.terms, fs, system)
    report = verify(f.target, f, tol)
    _emit(report.to_record())
    return EXIT_PASS if report.passed else EXIT_FAIL


def _suite(args: argparse.Namespace, tol: Tolerances) -> int:
    cfg = SuiteConfig(
        name=args.name,
        seed=args.seed,
        max_dim=args.max_dim,
        output_dir=Path(args.out) if args.out else None,
        case_count=args.cases,
    )
    result = run_suite(cfg, tol)
    sys.stdout.write(result.summary_markdown())
    return result.exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="commutator-lab", description="Commutator factorizations of traceless matrices.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="log to stderr (-vv for debug)")
    parser.add_argument("--threads", type=int, default=None, help="worker threads for parallel sweeps")
    parser.add_argument("--tol", type=float, default=None, help="relative residual acceptance threshold")
    commands = parser.add_subparsers(dest="command")

    factor = commands.add_parser("factor", help="factor a matrix read from JSON or CSV")
    factor.add_argument("--method", choices=FACTOR_METHODS, default="auto")
    factor.add_argument("--in", dest="input", required=True, help="input matrix (.json or .csv)")
    factor.add_argument("--out-b", help="where to write B")
    factor.add_argument("--out-c", help="where to write C")
    factor.add_argument("--report", help="write the verification report here instead of stdout")
    factor.set_defaults(handler=_factor)

    rearrange = commands.add_parser("steinitz", help="reorder a zero-sum tuple with small prefix sums")
    rearrange.add_argument("--values", required=True, help="values file (.json or .csv)")
    rearrange.add_argument("--mode", choices=("auto", "exhaustive", "greedy"), default="auto")
    rearrange.add_argument("--restarts", type=int, default=steinitz.DEFAULT_RESTARTS)
    rearrange.add_argument("--seed", type=int, default=0)
    rearrange.set_defaults(handler=_steinitz)

    tensor = commands.add_parser("tucci", help="tensor-leg operator experiments")
    tensor.add_argument("action", choices=("identity", "certify", "scan"))
    tensor.add_argument("--r", type=float, default=1.5, help="decay exponent of a_n = n^-r")
    tensor.add_argument("--depth", type=int, default=6)
    tensor.add_argument("--depths", type=_depths, default=_depths("1-10"))
    tensor.add_argument("--mode", choices=[m.value for m in tucci.TucciMode], default=None)
    tensor.add_argument("--out", help="CSV destination for scan (stdout by default)")
    tensor.set_defaults(handler=_tucci)

    demo = commands.add_parser("ergodic-demo", help="factor a crossed-product element on a cycle")
    demo.add_argument("--points", type=int, default=8)
    demo.add_argument("--step", type=int, default=1)
    demo.add_argument("--terms", type=_powers, default=[1])
    demo.add_argument("--seed", type=int, default=0)
    demo.set_defaults(handler=_ergodic)

    suite = commands.add_parser("suite", help="run a seeded experiment suite")
    suite.add_argument("name", choices=(*SUITES, "all"))
    suite.add_argument("--seed", type=int, default=7)
    suite.add_argument("--out", help="directory for reports.jsonl, summary.md and header.json")
    suite.add_argument("--max-dim", type=int, default=16)
    suite.add_argument("--cases", type=int, default=12)
    suite.set_defaults(handler=_suite)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    _configure_logging(args.verbose)

    try:
        if args.threads is not None:
            set_thread_count(args.threads)
        tol = get_tolerances()
        if args.tol is not None:
            tol = replace(tol, residual_rel=args.tol)
        with tolerance_context(tol):
            return args.handler(args, tol)
    except NonConvergence as err:
        print(f"commutator-lab: {err}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except CertificateViolation as err:
        print(f"commutator-lab: {err}", file=sys.stderr)
        return EXIT_FAIL
    except (CommutatorLabError, ValueError, OSError) as err:
        print(f"commutator-lab: {err}", file=sys.stderr)
        return EXIT_USAGE
