# maxbound_cli.py
# ------------------------------------------------------------
# Command-line front end for the Gaussian-maximum bounds library.
# - Parses one command and its flags into a RunConfig
# - Validates every numeric field against the invoked operation's gate
# - Calls core.* and writes a JSON / CSV / XLSX report via export.reports
#
# Run:
#   python maxbound_cli.py bound --n 100 --lambda-min 1 --lambda-max 1
#   python maxbound_cli.py certify --reps 100000 --workers 4 --no-timestamp
#   python maxbound_cli.py inequality-grid --format csv
#
# Exit codes: 0 pass, 1 check failure, 2 invalid input or gate violation,
# 3 numeric failure.
#
from __future__ import annotations

import argparse
import logging
import sys
from math import isfinite
from typing import Optional, Sequence, Tuple

from core.bounds import (
    HEADLINE_ALPHA,
    dependent_msq_bracket,
    exponential_quantile,
    gumbel_quantile,
    headline_bound,
    headline_display_threshold,
    independent_msq_bracket,
    lower_bound_certificate,
    max_query,
    smallest_valid_n,
)
from core.certify import (
    certificate_for_covariance,
    eigen_certificate,
    parse_ordering,
    resolve_target,
    run_certification_suite,
)
from core.covariance import eigen_bounds, load_covariance
from core.errors import DimensionError, DomainError, GateError, MaxBoundError, NumericError
from core.gaussian import sweep_inversion_bounds, sweep_inversion_round_trip, sweep_mills_bracket
from core.models import (
    CheckRecord,
    Command,
    CommandReport,
    OutputFormat,
    ProcessWindow,
    RunConfig,
    SimulationPlan,
    VerdictReport,
)
from core.montecarlo import certify_lower_bound, certify_upper_bounds, sample_max
from core.process import load_process_spec, stationary_lower_bound, stride_sweep
from core.settings import DEFAULT_SETTINGS, Settings
from export.reports import (
    build_bracket_table,
    build_certificate_table,
    build_scan_table,
    build_stride_table,
    build_sweep_table,
    build_verdict_table,
    utc_timestamp,
    write_report,
)

logger = logging.getLogger("maxbound")

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3

DEFAULT_PROBABILITIES = tuple(round(0.05 * i, 2) for i in range(1, 20))


# -----------------------------
# Argument parsing
# -----------------------------
def _float_list(text: str) -> Tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.replace(",", " ").split())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a list of numbers, got '{text}'") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=20240101, help="64-bit simulation seed")
    common.add_argument("--reps", type=int, default=100_000, help="Monte Carlo replications")
    common.add_argument("--workers", type=int, default=1, help="threads; never changes results")
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.JSON.value)
    common.add_argument("--out", default=None, help="output path (stdout when omitted)")
    common.add_argument("--strict", action="store_true", help="regime warnings become failures")
    common.add_argument("--no-timestamp", action="store_true", help="omit the report timestamp")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")

    parser = argparse.ArgumentParser(
        prog="maxbound",
        description="Certified bounds on the maximum of dependent Gaussian variables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(Command.BOUND.value, parents=[common], help="lower-bound certificate")
    p.add_argument("--n", type=int)
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--lambda-min", type=float)
    p.add_argument("--lambda-max", type=float)
    p.add_argument("--cov", help="covariance matrix file")
    p.add_argument("--ordering", default="natural", help="natural | best-of:K")

    p = sub.add_parser(Command.BRACKET.value, parents=[common], help="M_n^2 quantile brackets")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--probabilities", type=_float_list, default=DEFAULT_PROBABILITIES)

    p = sub.add_parser(Command.CERTIFY.value, parents=[common], help="Monte Carlo certification")
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--cov", help="covariance matrix file (default: the standard suite)")
    p.add_argument("--process", help="process spec file, window of --n values")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--ordering", default="natural", help="natural | best-of:K")
    p.add_argument("--thresholds", type=_float_list, default=(2.0, 2.5, 3.0))

    p = sub.add_parser(Command.SCAN.value, parents=[common], help="thresholds across n or alpha")
    p.add_argument("--scan", dest="scan_over", choices=["n", "alpha"], default="n")
    p.add_argument("--values", type=_float_list, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--lambda-min", type=float, default=1.0)
    p.add_argument("--lambda-max", type=float, default=1.0)

    p = sub.add_parser(Command.PROCESS_BOUND.value, parents=[common], help="stationary process certificate")
    p.add_argument("--process", required=True, help="process spec file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--k-max", type=int, help="sweep k = 1..K")

    sub.add_parser(Command.INEQUALITY_GRID.value, parents=[common], help="inequality grid sweeps")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=Command(ns.command),
        n=getattr(ns, "n", None),
        alpha=getattr(ns, "alpha", 0.25),
        k=getattr(ns, "k", None),
        k_max=getattr(ns, "k_max", None),
        seed=ns.seed,
        replications=ns.reps,
        workers=ns.workers,
        lambda_min=getattr(ns, "lambda_min", None),
        lambda_max=getattr(ns, "lambda_max", None),
        cov_path=getattr(ns, "cov", None),
        process_path=getattr(ns, "process", None),
        ordering=getattr(ns, "ordering", "natural"),
        probabilities=tuple(getattr(ns, "probabilities", ())),
        scan_over=getattr(ns, "scan_over", "n"),
        scan_values=tuple(getattr(ns, "values", ())),
        thresholds=tuple(getattr(ns, "thresholds", (2.0, 2.5, 3.0))),
        output_format=OutputFormat(ns.format),
        out_path=ns.out,
        strict=ns.strict,
        timestamp=not ns.no_timestamp,
    )


# -----------------------------
# Validation (before any computation)
# -----------------------------
def _check_alpha(alpha: float) -> None:
    if not (isfinite(alpha) and 0.0 < alpha < 0.5):
        raise DomainError(f"alpha must lie in (0, 1/2) (got {alpha:g}).")


def _check_n_gate(n: int, alpha: float) -> None:
    n_min = smallest_valid_n(alpha)
    if n < n_min:
        raise GateError(
            f"requires N + L_alpha >= 6; smallest valid n at alpha={alpha:g} is {n_min} (got n={n})",
            smallest_n=n_min,
        )


def validate_config(cfg: RunConfig) -> None:
    """
    Raise DomainError / GateError for any field outside the invoked
    operation's domain.
    """
    if cfg.seed < 0:
        raise DomainError("--seed must be non-negative.")
    if cfg.workers < 1:
        raise DomainError("--workers must be >= 1.")
    if cfg.n is not None and cfg.n < 1:
        raise DomainError("--n must be a positive integer.")
    if cfg.output_format == OutputFormat.XLSX and cfg.out_path is None:
        raise DomainError("--format xlsx needs --out.")

    cmd = cfg.command
    if cmd == Command.BOUND:
        _check_alpha(cfg.alpha)
        parse_ordering(cfg.ordering)
        if cfg.cov_path is None:
            if cfg.n is None or cfg.lambda_min is None or cfg.lambda_max is None:
                raise DomainError("bound needs --cov, or --n with --lambda-min and --lambda-max.")
            if not cfg.lambda_min > 0.0 or cfg.lambda_max < cfg.lambda_min:
                raise DomainError("need 0 < lambda_min <= lambda_max.")
        if cfg.n is not None:
            _check_n_gate(cfg.n, cfg.alpha)
    elif cmd == Command.BRACKET:
        if cfg.n is None:
            raise DomainError("bracket needs --n.")
        if not cfg.probabilities or not all(0.0 < p < 1.0 for p in cfg.probabilities):
            raise DomainError("--probabilities must lie in (0, 1).")
    elif cmd == Command.CERTIFY:
        _check_alpha(cfg.alpha)
        parse_ordering(cfg.ordering)
        if cfg.replications < DEFAULT_SETTINGS.min_certification_reps:
            raise DomainError(
                f"certification runs need --reps >= {DEFAULT_SETTINGS.min_certification_reps}."
            )
        if cfg.cov_path is not None and cfg.process_path is not None:
            raise DomainError("give at most one of --cov and --process.")
        if cfg.process_path is not None:
            if cfg.n is None:
                raise DomainError("--process needs --n.")
            if cfg.k is None or cfg.k < 1:
                raise DomainError("--k must be >= 1.")
            _check_n_gate(cfg.n, cfg.alpha)
        elif cfg.n is not None and cfg.cov_path is not None:
            _check_n_gate(cfg.n, cfg.alpha)
    elif cmd == Command.SCAN:
        if not cfg.scan_values:
            raise DomainError("scan needs --values.")
        if not cfg.lambda_min > 0.0 or cfg.lambda_max < cfg.lambda_min:
            raise DomainError("need 0 < lambda_min <= lambda_max.")
        if cfg.scan_over == "n":
            _check_alpha(cfg.alpha)
            if any(v < 1 or int(v) != v for v in cfg.scan_values):
                raise DomainError("scanned n values must be positive integers.")
        else:
            if cfg.n is None:
                raise DomainError("scan over alpha needs --n.")
    elif cmd == Command.PROCESS_BOUND:
        _check_alpha(cfg.alpha)
        k_top = cfg.k_max if cfg.k_max is not None else cfg.k
        if k_top is None or k_top < 1:
            raise DomainError("--k and --k-max must be >= 1.")
        _check_n_gate(cfg.n, cfg.alpha)


# -----------------------------
# Commands
# -----------------------------
def _cmd_bound(cfg: RunConfig, settings: Settings) -> CommandReport:
    report = CommandReport(command=cfg.command, inputs={"alpha": cfg.alpha})
    certs = []
    if cfg.cov_path is not None:
        c = load_covariance(cfg.cov_path, settings=settings)
        if cfg.n is not None and cfg.n != c.dim:
            raise DimensionError(f"--n {cfg.n} does not match the {c.dim}x{c.dim} covariance.")
        best_of = parse_ordering(cfg.ordering)
        report.inputs.update({"cov": cfg.cov_path, "n": c.dim, "ordering": cfg.ordering})
        certs.append(certificate_for_covariance(c, cfg.alpha, best_of=best_of, seed=cfg.seed, settings=settings))
        certs.append(eigen_certificate(c, cfg.alpha))
        lmin, lmax = eigen_bounds(c)
        report.outputs.update({"lambda_min": lmin, "lambda_max": lmax})
        if best_of is not None:
            report.seed = cfg.seed
    else:
        report.inputs.update({"n": cfg.n, "lambda_min": cfg.lambda_min, "lambda_max": cfg.lambda_max})
        if cfg.alpha == HEADLINE_ALPHA:
            certs.append(headline_bound(cfg.n, cfg.lambda_min, cfg.lambda_max))
            report.outputs["headline_display_threshold"] = headline_display_threshold(
                cfg.n, cfg.lambda_min, cfg.lambda_max
            )
        else:
            certs.append(
                lower_bound_certificate(
                    cfg.n, cfg.alpha, cfg.lambda_min ** 0.5, cfg.lambda_max ** 0.5, source="eigenvalues"
                )
            )
    best = max(certs, key=lambda c: c.threshold)
    report.outputs.update({
        "threshold": best.threshold,
        "guaranteed_tail": best.guaranteed_tail,
        "source": best.source,
        "summary": best.summary(),
    })
    report.tables["certificates"] = build_certificate_table(certs)
    return report


def _cmd_bracket(cfg: RunConfig, settings: Settings) -> CommandReport:
    q = max_query(cfg.n)
    rows = []
    for p in cfg.probabilities:
        ind = independent_msq_bracket(q, gumbel_quantile(p))
        dep = dependent_msq_bracket(q, exponential_quantile(p))
        rows.append((p, ind, dep))
    report = CommandReport(
        command=cfg.command,
        inputs={"n": cfg.n, "probabilities": list(cfg.probabilities)},
        outputs={"big_n": q.big_n},
    )
    report.tables["brackets"] = build_bracket_table(rows)
    outside = [p for p, ind, _ in rows if not ind.regime_ok]
    if outside:
        report.warnings.append(
            "independent bracket outside the certified regime M_n >= 2 at p = "
            + ", ".join(f"{p:g}" for p in outside)
        )
    return report


def _cmd_certify(cfg: RunConfig, settings: Settings) -> CommandReport:
    report = CommandReport(
        command=cfg.command,
        inputs={"alpha": cfg.alpha, "replications": cfg.replications, "thresholds": list(cfg.thresholds)},
        seed=cfg.seed,
    )
    if cfg.cov_path is None and cfg.process_path is None:
        report.inputs["target"] = "standard suite"
        report.verdicts = run_certification_suite(
            cfg.seed, cfg.replications, cfg.workers, alpha=cfg.alpha, thresholds=cfg.thresholds, settings=settings
        )
    else:
        if cfg.cov_path is not None:
            c = load_covariance(cfg.cov_path, settings=settings)
            if cfg.n is not None and cfg.n != c.dim:
                raise DimensionError(f"--n {cfg.n} does not match the {c.dim}x{c.dim} covariance.")
            report.inputs.update({"cov": cfg.cov_path, "ordering": cfg.ordering})
        else:
            model = load_process_spec(cfg.process_path, settings=settings)
            c = resolve_target(ProcessWindow(model=model, n=cfg.n, k=cfg.k), settings=settings)
            report.inputs.update({"process": cfg.process_path, "n": cfg.n, "k": cfg.k})
        plan = SimulationPlan(
            seed=cfg.seed,
            replications=cfg.replications,
            target=c,
            workers=cfg.workers,
            chunk_size=settings.chunk_size,
        )
        cert = certificate_for_covariance(
            c, cfg.alpha, best_of=parse_ordering(cfg.ordering), seed=cfg.seed, settings=settings
        )
        maxima = sample_max(c, plan)
        report.verdicts = [
            certify_lower_bound(cert, c, plan, samples=maxima, settings=settings),
            certify_upper_bounds(c, plan, cfg.thresholds, samples=maxima, settings=settings),
        ]
        report.outputs["threshold"] = cert.threshold
    report.outputs["passed_reports"] = sum(1 for v in report.verdicts if v.passed)
    report.outputs["total_reports"] = len(report.verdicts)
    report.tables["checks"] = build_verdict_table(report.verdicts)
    return report


def _cmd_scan(cfg: RunConfig, settings: Settings) -> CommandReport:
    sigma, tau = cfg.lambda_min ** 0.5, cfg.lambda_max ** 0.5
    rows = []
    for value in cfg.scan_values:
        n, alpha = (int(value), cfg.alpha) if cfg.scan_over == "n" else (cfg.n, float(value))
        try:
            rows.append((value, lower_bound_certificate(n, alpha, sigma, tau, source="eigenvalues"), ""))
        except DomainError as exc:
            rows.append((value, None, str(exc)))
    report = CommandReport(
        command=cfg.command,
        inputs={
            "scan": cfg.scan_over,
            "values": list(cfg.scan_values),
            "n": cfg.n,
            "alpha": cfg.alpha,
            "lambda_min": cfg.lambda_min,
            "lambda_max": cfg.lambda_max,
        },
    )
    report.tables["scan"] = build_scan_table(cfg.scan_over, rows)
    gated = [value for value, cert, _ in rows if cert is None]
    report.outputs["certified_points"] = len(rows) - len(gated)
    if gated:
        report.warnings.append("no certificate at " + ", ".join(f"{v:g}" for v in gated))
    return report


def _cmd_process_bound(cfg: RunConfig, settings: Settings) -> CommandReport:
    model = load_process_spec(cfg.process_path, settings=settings)
    report = CommandReport(
        command=cfg.command,
        inputs={"process": cfg.process_path, "n": cfg.n, "alpha": cfg.alpha, "k": cfg.k, "k_max": cfg.k_max},
        outputs={"order": model.order, "truncation_tail": model.truncation_tail},
    )
    if cfg.k_max is None:
        cert = stationary_lower_bound(model, cfg.n, cfg.k, cfg.alpha)
        rows = [(cfg.k, cfg.n // cfg.k, cert)]
    else:
        sweep = stride_sweep(model, cfg.n, cfg.alpha, range(1, cfg.k_max + 1))
        rows = [(k, cfg.n // k, cert) for k, cert in sweep]
        usable = [(k, cert) for k, cert in sweep if cert is not None]
        if not usable:
            raise GateError(f"no stride k in 1..{cfg.k_max} passes N + L_alpha >= 6 at n={cfg.n}.")
        cert = max(usable, key=lambda kc: kc[1].threshold)[1]
    best_k = next(k for k, _, c in rows if c is cert)
    report.outputs.update({"best_k": best_k, "threshold": cert.threshold, "summary": cert.summary()})
    report.tables["strides"] = build_stride_table(rows)
    return report


def _cmd_inequality_grid(cfg: RunConfig, settings: Settings) -> CommandReport:
    sweeps = [
        sweep_inversion_bounds("lower", settings=settings),
        sweep_inversion_bounds("upper", settings=settings),
        sweep_mills_bracket(settings=settings),
        sweep_inversion_round_trip(settings=settings),
    ]
    verdict = VerdictReport(name="inequality-grid")
    for s in sweeps:
        verdict.checks.append(
            CheckRecord(
                label=f"{s.name} on [{s.start:g}, {s.stop:g}] step {s.step:g}",
                bound=0.0,
                estimate=float(s.violations),
                ci_low=s.worst_margin,
                ci_high=s.worst_margin,
                slack=s.worst_margin,
                passed=s.ok,
                detail=f"worst at x={s.worst_at:g}",
            )
        )
    report = CommandReport(command=cfg.command, verdicts=[verdict])
    report.outputs["violations"] = sum(s.violations for s in sweeps)
    report.tables["sweeps"] = build_sweep_table(sweeps)
    return report


_DISPATCH = {
    Command.BOUND: _cmd_bound,
    Command.BRACKET: _cmd_bracket,
    Command.CERTIFY: _cmd_certify,
    Command.SCAN: _cmd_scan,
    Command.PROCESS_BOUND: _cmd_process_bound,
    Command.INEQUALITY_GRID: _cmd_inequality_grid,
}


# -----------------------------
# Entry points
# -----------------------------
def execute(cfg: RunConfig, *, settings: Settings = DEFAULT_SETTINGS) -> CommandReport:
    """Validate and run one command; raises library errors."""
    validate_config(cfg)
    logger.info("running %s", cfg.command.value)
    return _DISPATCH[cfg.command](cfg, settings)


def run(cfg: RunConfig, *, settings: Settings = DEFAULT_SETTINGS) -> int:
    """
    Run one command, write its report and return the exit status.
    Error messages go to stderr; tracebacks are logged at DEBUG.
    """
    try:
        report = execute(cfg, settings=settings)
        stamp = utc_timestamp() if cfg.timestamp else None
        write_report(report, cfg.output_format, cfg.out_path, timestamp=stamp)
    except NumericError as exc:
        logger.debug("numeric failure", exc_info=True)
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERIC
    except (MaxBoundError, OSError) as exc:
        logger.debug("invalid input", exc_info=True)
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT

    for warning in report.warnings:
        logger.warning(warning)
    if not report.passed:
        return EXIT_FAIL
    if cfg.strict and report.warnings:
        return EXIT_FAIL
    return EXIT_PASS


def main(argv: Optional[Sequence[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    level = logging.WARNING if ns.verbose == 0 else (logging.INFO if ns.verbose == 1 else logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
