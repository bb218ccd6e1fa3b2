# core/montecarlo.py
# ------------------------------------------------------------
# Seeded simulation of Gaussian maxima and the empirical checks of every
# bound in bounds.py.
#
# Determinism contract
# --------------------
# Replication i of a plan draws from its own stream:
#
#     SeedSequence(seed, spawn_key=(i,))  ->  Philox  ->  numpy Generator
#
# so replication i is reproducible in isolation, and work can be cut into
# chunks and spread over threads without changing a single bit of output.
# Chunk results are written back by replication index; hit counts are sums.
#
# Normal variates come from the inverse-CDF transform of open-interval
# uniforms (k + 1/2) / 2^52 through gaussian.std_normal_quantile.
#
# Verdicts
# --------
# A bound is rejected only when the Wilson interval of the empirical tail
# excludes it:
#   lower bound  p >= b : FAIL iff ci_high < b
#   upper bound  p <= b : FAIL iff ci_low  > b
#
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from math import log, sqrt
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import signal, stats

from .bounds import coupling_sandwich, gaussian_gumbel_transform, union_upper_tail
from .covariance import decompose, identity
from .errors import DimensionError, DomainError
from .gaussian import std_normal_log_tail, std_normal_quantile, std_normal_tail
from .models import (
    CheckRecord,
    CovarianceMatrix,
    LowerBoundCertificate,
    SimulationPlan,
    TailEstimate,
    VerdictReport,
    WoldModel,
)
from .settings import DEFAULT_SETTINGS, Settings

logger = logging.getLogger(__name__)

_UNIFORM_BITS = 52
_UNIFORM_SCALE = 2.0 ** -_UNIFORM_BITS
# rows x width held in memory by one chunk of path simulation
_PATH_ELEMENT_BUDGET = 4_000_000


# -----------------------------
# Random streams
# -----------------------------
def replication_generator(seed: int, i: int) -> np.random.Generator:
    """Counter-based Philox generator for replication i of a seeded plan."""
    if seed < 0 or i < 0:
        raise DomainError("seed and replication index must be non-negative.")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(i),))))


def _open_uniforms(gen: np.random.Generator, size: int) -> np.ndarray:
    return (gen.integers(0, 2 ** _UNIFORM_BITS, size=size, dtype=np.int64) + 0.5) * _UNIFORM_SCALE


def standard_normals(gen: np.random.Generator, size: int) -> np.ndarray:
    """size standard normals by inversion of uniforms on the open unit interval."""
    return np.asarray(std_normal_quantile(_open_uniforms(gen, size)), dtype=float)


def _normals_block(seed: int, start: int, stop: int, width: int) -> np.ndarray:
    u = np.empty((stop - start, width))
    for row, i in enumerate(range(start, stop)):
        u[row] = _open_uniforms(replication_generator(seed, i), width)
    return np.asarray(std_normal_quantile(u), dtype=float)


def _check_plan(plan: SimulationPlan, *, certification: bool = False, settings: Settings = DEFAULT_SETTINGS) -> None:
    if plan.replications < 1:
        raise DomainError("replications must be >= 1.")
    if certification and plan.replications < settings.min_certification_reps:
        raise DomainError(
            f"certification runs need at least {settings.min_certification_reps} replications "
            f"(got {plan.replications})."
        )
    if plan.workers < 1 or plan.chunk_size < 1:
        raise DomainError("workers and chunk_size must be >= 1.")
    if plan.seed < 0:
        raise DomainError("seed must be non-negative.")


def _run_chunks(
    plan: SimulationPlan,
    rows_per_chunk: int,
    work: Callable[[int, int], np.ndarray],
) -> np.ndarray:
    """
    Apply work(start, stop) to consecutive replication ranges and stack the
    results in replication order, serially or on plan.workers threads.
    """
    reps = plan.replications
    rows = max(1, int(rows_per_chunk))
    bounds = [(s, min(s + rows, reps)) for s in range(0, reps, rows)]
    logger.debug("running %d replications in %d chunks on %d worker(s)", reps, len(bounds), plan.workers)
    if plan.workers == 1 or len(bounds) == 1:
        parts = [work(s, e) for s, e in bounds]
    else:
        with ThreadPoolExecutor(max_workers=plan.workers) as pool:
            parts = list(pool.map(lambda se: work(*se), bounds))
    return np.concatenate(parts, axis=0)


def _check_target(c: CovarianceMatrix, plan: SimulationPlan) -> None:
    if isinstance(plan.target, CovarianceMatrix) and plan.target.dim != c.dim:
        raise DimensionError(f"plan target has dimension {plan.target.dim}, matrix has {c.dim}.")


# -----------------------------
# Sampling
# -----------------------------
def sample_normals(dim: int, plan: SimulationPlan) -> np.ndarray:
    """(replications, dim) i.i.d. standard normals; row i from replication i's stream."""
    _check_plan(plan)
    return _run_chunks(plan, plan.chunk_size, lambda s, e: _normals_block(plan.seed, s, e, dim))


def sample_vectors(c: CovarianceMatrix, plan: SimulationPlan) -> np.ndarray:
    """(replications, dim) draws from N(0, C) through the triangular factor."""
    _check_plan(plan)
    _check_target(c, plan)
    lower = decompose(c).lower_factor
    return _run_chunks(plan, plan.chunk_size, lambda s, e: _normals_block(plan.seed, s, e, c.dim) @ lower.T)


def sample_max(c: CovarianceMatrix, plan: SimulationPlan) -> np.ndarray:
    """
    One maximum per replication of X = L Z, Z i.i.d. N(0, 1), L the triangular
    factor of C in natural order.

    Raises
    ------
    DecompositionError
        Propagated from the factorization.
    DimensionError
        plan.target is a matrix of another dimension.
    """
    _check_plan(plan)
    _check_target(c, plan)
    lower = decompose(c).lower_factor
    logger.info("sample_max dim=%d seed=%d reps=%d", c.dim, plan.seed, plan.replications)
    return _run_chunks(
        plan,
        plan.chunk_size,
        lambda s, e: np.max(_normals_block(plan.seed, s, e, c.dim) @ lower.T, axis=1),
    )


def simulate_paths(m: WoldModel, n: int, gen: np.random.Generator) -> np.ndarray:
    """
    One path X_1..X_n of the model: the innovations filtered by psi (with K
    burn-in values) plus the truncation tail as independent white noise.
    """
    coeffs = m.ma_coefficients()
    burn = coeffs.size - 1
    z = standard_normals(gen, n + burn)
    x = m.innovation_sd * signal.lfilter(coeffs, [1.0], z)[burn:]
    if m.truncation_tail > 0.0:
        x = x + sqrt(m.truncation_tail) * standard_normals(gen, n)
    return x


def sample_process_max(m: WoldModel, n: int, plan: SimulationPlan) -> np.ndarray:
    """max(X_1..X_n) per replication for a stationary process model."""
    _check_plan(plan)
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer.")
    width = int(n) + m.order
    rows = min(plan.chunk_size, max(1, _PATH_ELEMENT_BUDGET // width))

    def work(start: int, stop: int) -> np.ndarray:
        return np.array(
            [np.max(simulate_paths(m, int(n), replication_generator(plan.seed, i))) for i in range(start, stop)]
        )

    logger.info("sample_process_max n=%d K=%d seed=%d reps=%d", n, m.order, plan.seed, plan.replications)
    return _run_chunks(plan, rows, work)


def asymptotic_ratio_medians(
    m: WoldModel,
    ns: Sequence[int],
    plan: SimulationPlan,
) -> List[Tuple[int, float, float]]:
    """(n, median M_n, median M_n / sqrt(2 log n)) for each n (n >= 2)."""
    out: List[Tuple[int, float, float]] = []
    for n in ns:
        if n < 2:
            raise DomainError("ratio medians need n >= 2.")
        med = float(np.median(sample_process_max(m, int(n), plan)))
        out.append((int(n), med, med / sqrt(2.0 * log(n))))
    return out


# -----------------------------
# Tail estimation
# -----------------------------
def wilson_interval(hits: int, replications: int, confidence: float = 0.95) -> Tuple[float, float]:
    """
    Wilson score interval for a binomial proportion.

    Raises
    ------
    DomainError
        replications < 1, hits outside [0, replications], confidence outside (0, 1).
    """
    if replications < 1 or not 0 <= hits <= replications:
        raise DomainError("need 0 <= hits <= replications and replications >= 1.")
    if not 0.0 < confidence < 1.0:
        raise DomainError("confidence must lie in (0, 1).")
    z = float(std_normal_quantile(0.5 + confidence / 2.0))
    n = float(replications)
    p_hat = hits / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p_hat + z2 / (2.0 * n)) / denom
    spread = z * sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)) / denom
    low = 0.0 if hits == 0 else max(0.0, min(p_hat, center - spread))
    high = 1.0 if hits == replications else min(1.0, max(p_hat, center + spread))
    return low, high


def estimate_tail(
    samples: Union[Sequence[float], np.ndarray],
    threshold: float,
    *,
    settings: Settings = DEFAULT_SETTINGS,
) -> TailEstimate:
    """Empirical Pr{M >= threshold} with its Wilson interval."""
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise DomainError("estimate_tail needs at least one sample.")
    hits = int(np.count_nonzero(arr >= threshold))
    low, high = wilson_interval(hits, arr.size, settings.confidence)
    return TailEstimate(
        threshold=float(threshold),
        hits=hits,
        replications=int(arr.size),
        point=hits / arr.size,
        ci_low=low,
        ci_high=high,
    )


# -----------------------------
# Certification checks
# -----------------------------
def certify_lower_bound(
    cert: LowerBoundCertificate,
    c: CovarianceMatrix,
    plan: SimulationPlan,
    *,
    samples: Optional[np.ndarray] = None,
    settings: Settings = DEFAULT_SETTINGS,
) -> VerdictReport:
    """
    Pr{M_n >= threshold} >= 1 - 2 alpha against simulation of N(0, C).
    ``samples`` reuses maxima already drawn for this plan.
    """
    if cert.n != c.dim:
        raise DimensionError(f"certificate speaks about n={cert.n}, matrix has dimension {c.dim}.")
    _check_plan(plan, certification=True, settings=settings)
    maxima = sample_max(c, plan) if samples is None else np.asarray(samples, dtype=float)
    est = estimate_tail(maxima, cert.threshold, settings=settings)
    check = CheckRecord(
        label=f"Pr{{M_{cert.n} >= {cert.threshold:.6f}}} >= {cert.guaranteed_tail:g}",
        bound=cert.guaranteed_tail,
        estimate=est.point,
        ci_low=est.ci_low,
        ci_high=est.ci_high,
        slack=est.point - cert.guaranteed_tail,
        passed=est.ci_high >= cert.guaranteed_tail,
        detail=cert.source,
    )
    return VerdictReport(
        name="lower-bound",
        checks=[check],
        details={"threshold": cert.threshold, "sigma": cert.sigma, "tau": cert.tau, "hits": est.hits},
    )


def certify_upper_bounds(
    c_or_n: Union[CovarianceMatrix, int],
    plan: SimulationPlan,
    thresholds: Sequence[float],
    *,
    samples: Optional[np.ndarray] = None,
    settings: Settings = DEFAULT_SETTINGS,
) -> VerdictReport:
    """
    Union bound Pr{M_n >= A} <= n (1 - Phi(A)) for every A. An int means n
    independent unit Gaussians.

    Raises
    ------
    DomainError
        Marginal variances differ from 1.
    """
    c = identity(int(c_or_n)) if isinstance(c_or_n, (int, np.integer)) else c_or_n
    if not np.allclose(c.diagonal, 1.0, rtol=0.0, atol=1e-9):
        raise DomainError("the union bound check needs unit-variance marginals.")
    _check_plan(plan, certification=True, settings=settings)
    maxima = sample_max(c, plan) if samples is None else np.asarray(samples, dtype=float)

    report = VerdictReport(name="upper-bound", details={"n": c.dim})
    for a in thresholds:
        bound = float(union_upper_tail(c.dim, std_normal_tail(float(a))))
        est = estimate_tail(maxima, float(a), settings=settings)
        report.checks.append(
            CheckRecord(
                label=f"Pr{{M_{c.dim} >= {float(a):g}}} <= {bound:.6f}",
                bound=bound,
                estimate=est.point,
                ci_low=est.ci_low,
                ci_high=est.ci_high,
                slack=bound - est.point,
                passed=est.ci_low <= bound,
            )
        )
    return report


def gumbel_coupling_test(
    n: int,
    plan: SimulationPlan,
    *,
    settings: Settings = DEFAULT_SETTINGS,
) -> VerdictReport:
    """
    Gumbel transform of i.i.d. maxima: KS distance to the standard Gumbel CDF
    (critical value at settings.ks_level) and the pointwise sandwich
    G <= -log(n (1 - Phi(M_n))) <= G + exp(-G)/n on every sample.
    """
    _check_plan(plan, certification=True, settings=settings)
    maxima = sample_max(identity(int(n)), plan)
    g = np.atleast_1d(gaussian_gumbel_transform(maxima, int(n)))
    ks = stats.kstest(g, "gumbel_r")
    critical = float(stats.kstwo.ppf(1.0 - settings.ks_level, g.size))
    lower_ok, upper_ok = coupling_sandwich(g, int(n), std_normal_log_tail(maxima), settings=settings)
    held = int(np.count_nonzero(lower_ok & upper_ok))

    report = VerdictReport(
        name="gumbel-coupling",
        details={"ks_statistic": float(ks.statistic), "ks_pvalue": float(ks.pvalue), "ks_critical": critical},
    )
    report.checks.append(
        CheckRecord(
            label=f"KS(G, Gumbel) <= {critical:.5f}",
            bound=critical,
            estimate=float(ks.statistic),
            ci_low=float(ks.statistic),
            ci_high=float(ks.statistic),
            slack=critical - float(ks.statistic),
            passed=float(ks.statistic) <= critical,
        )
    )
    frac = held / g.size
    report.checks.append(
        CheckRecord(
            label="coupling sandwich on every sample",
            bound=1.0,
            estimate=frac,
            ci_low=frac,
            ci_high=frac,
            slack=frac - 1.0,
            passed=held == g.size,
            detail=f"{g.size - held} violation(s)",
        )
    )
    return report


def certify_hi_inequality(
    c: CovarianceMatrix,
    plan: SimulationPlan,
    a: float,
    b: float,
    *,
    settings: Settings = DEFAULT_SETTINGS,
) -> VerdictReport:
    """
    Pr{M_n >= A + B} >= Pr{max_i R_i >= A} * min_i Pr{E_i >= B}, B <= 0, with
    R_i = L_ii Z_i and E_i = X_i - R_i rebuilt from the triangular factor.

    FAIL iff ci_high(left) < ci_low(max R) * min_i ci_low(E_i).
    The exact min_i Pr{E_i >= B} = Phi(-B / max tau_i) is reported alongside.
    """
    if b > 0.0:
        raise DomainError("the inequality needs B <= 0.")
    _check_plan(plan, certification=True, settings=settings)
    _check_target(c, plan)
    dec = decompose(c, settings=settings)
    lower = dec.lower_factor
    diag = np.diag(lower)

    def work(start: int, stop: int) -> np.ndarray:
        z = _normals_block(plan.seed, start, stop, c.dim)
        x = z @ lower.T
        r = z * diag
        e = x - r
        head = np.column_stack([np.max(x, axis=1) >= a + b, np.max(r, axis=1) >= a])
        return np.column_stack([head, e >= b])

    flags = _run_chunks(plan, plan.chunk_size, work)
    reps = plan.replications
    conf = settings.confidence
    lhs_hits = int(np.count_nonzero(flags[:, 0]))
    r_hits = int(np.count_nonzero(flags[:, 1]))
    e_hits = np.count_nonzero(flags[:, 2:], axis=0)

    lhs_low, lhs_high = wilson_interval(lhs_hits, reps, conf)
    r_low, r_high = wilson_interval(r_hits, reps, conf)
    e_lows = [wilson_interval(int(h), reps, conf)[0] for h in e_hits]
    e_points = e_hits / reps
    rhs_point = (r_hits / reps) * float(np.min(e_points))
    rhs_low = r_low * min(e_lows)

    tau_max = sqrt(dec.tau2)
    exact_e = 1.0 if tau_max == 0.0 else float(std_normal_tail(b / tau_max))

    check = CheckRecord(
        label=f"Pr{{M_{c.dim} >= {a + b:g}}} >= Pr{{max R >= {a:g}}} * min Pr{{E >= {b:g}}}",
        bound=rhs_point,
        estimate=lhs_hits / reps,
        ci_low=lhs_low,
        ci_high=lhs_high,
        slack=lhs_hits / reps - rhs_point,
        passed=lhs_high >= rhs_low,
    )
    return VerdictReport(
        name="hi-inequality",
        checks=[check],
        details={
            "a": float(a),
            "b": float(b),
            "max_r_tail": r_hits / reps,
            "max_r_ci": [r_low, r_high],
            "min_e_tail": float(np.min(e_points)),
            "min_e_tail_exact": exact_e,
            "rhs_ci_low": rhs_low,
        },
    )


__all__ = [
    "replication_generator",
    "standard_normals",
    "sample_normals",
    "sample_vectors",
    "sample_max",
    "simulate_paths",
    "sample_process_max",
    "asymptotic_ratio_medians",
    "wilson_interval",
    "estimate_tail",
    "certify_lower_bound",
    "certify_upper_bounds",
    "gumbel_coupling_test",
    "certify_hi_inequality",
]
