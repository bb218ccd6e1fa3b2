# core/models.py
# ------------------------------------------------------------
# Core data models for the Gaussian-maximum bounds library.
# This file contains NO imports from other local modules
# to avoid circular-import issues.
#
# Units convention (consistent across the codebase):
# - Variables X_i are zero-mean Gaussians; "variance units" are those of C.
# - sigma, tau, thresholds: standard-deviation units (same as the X_i).
# - Probabilities are plain floats in [0, 1].
# - All logarithms are natural logarithms.
#
# Notation
# - n     : number of variables whose maximum M_n is studied
# - N     : log(n^2 / 2 pi)
# - L_a   : -2 log(-log alpha)
# - V     : -2 log(1 - Phi(x)) - log(2 pi)
#
# This file is purely data containers + tiny helpers.
# All calculations live in gaussian.py / bounds.py / covariance.py /
# process.py / montecarlo.py / certify.py.

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from math import log, pi, sqrt
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np


# -----------------------------
# Enumerations
# -----------------------------
class Command(str, Enum):
    BOUND = "bound"
    BRACKET = "bracket"
    CERTIFY = "certify"
    SCAN = "scan"
    PROCESS_BOUND = "process-bound"
    INEQUALITY_GRID = "inequality-grid"


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    XLSX = "xlsx"


class Coupling(str, Enum):
    GUMBEL = "gumbel"            # independent case, G = -log(-n log F(M_n))
    EXPONENTIAL = "exponential"  # any dependence, -log n - log(1 - F(M_n)) <= E


class ProcessKind(str, Enum):
    AR1 = "ar1"
    PSI_LIST = "psi-list"


# -----------------------------
# Gaussian tail coordinates
# -----------------------------
@dataclass(frozen=True)
class TailPoint:
    """
    One point of the tail-inversion coordinate system.

    x : standard-normal abscissa
    y : x^2
    v : V statistic, -2 log(1 - Phi(x)) - log(2 pi)
    """
    x: float
    y: float
    v: float


@dataclass(frozen=True)
class GridSweep:
    """
    Outcome of a vectorized inequality sweep over an abscissa grid.

    worst_margin is the smallest relative slack seen (negative means violated)
    and worst_at the abscissa where it occurred.
    """
    name: str
    start: float
    stop: float
    step: float
    points: int
    violations: int
    worst_margin: float
    worst_at: float

    @property
    def ok(self) -> bool:
        return self.violations == 0


# -----------------------------
# Bounds on M_n
# -----------------------------
@dataclass(frozen=True)
class MaxQuery:
    """
    The count n of variables and its derived constant N = log(n^2 / 2 pi).
    """
    n: int

    @property
    def big_n(self) -> float:
        return 2.0 * log(self.n) - log(2.0 * pi)


@dataclass(frozen=True)
class QuantileBracket:
    """
    Bracket for a quantile of M_n^2 produced by a coupling variable.

    coupling       : which coupling produced the bracket
    coupling_value : the Gumbel g or exponential e value used
    msq_lower      : lower bound for M_n^2 (absent for the dependent form)
    msq_upper      : upper bound for M_n^2 (always >= 1)
    regime_ok      : whether the M_n >= 2 (independent) / M_n >= 1 (dependent)
                     applicability condition holds; False marks a non-certified
                     bracket
    """
    coupling: Coupling
    coupling_value: float
    msq_lower: Optional[float]
    msq_upper: float
    regime_ok: bool

    @property
    def m_lower(self) -> Optional[float]:
        if self.msq_lower is None:
            return None
        return sqrt(max(0.0, self.msq_lower))

    @property
    def m_upper(self) -> float:
        return sqrt(self.msq_upper)

    def contains(self, msq: float) -> bool:
        lo_ok = self.msq_lower is None or self.msq_lower <= msq
        return lo_ok and msq <= self.msq_upper


@dataclass(frozen=True)
class LowerBoundCertificate:
    """
    Certified lower tail bound Pr{M_n >= threshold} >= guaranteed_tail.

    n               : number of variables the certificate speaks about
    alpha           : tail parameter, 0 < alpha < 1/2
    l_alpha         : L_alpha = -2 log(-log alpha)
    sigma           : residual standard deviation (min over the ordering)
    tau             : conditional-mean standard deviation (max over the ordering)
    threshold       : sigma * sqrt(N + L_a - log(N + L_a)) + tau * Phi^-1(alpha)
    guaranteed_tail : 1 - 2 alpha
    source          : free text naming how sigma/tau were obtained
    """
    n: int
    alpha: float
    l_alpha: float
    sigma: float
    tau: float
    threshold: float
    guaranteed_tail: float
    source: str = ""

    @property
    def big_n(self) -> float:
        return 2.0 * log(self.n) - log(2.0 * pi)

    def summary(self) -> str:
        """One-line human-readable summary."""
        return (
            f"Pr{{M_{self.n} >= {self.threshold:.4f}}} >= {self.guaranteed_tail:.3f} "
            f"(alpha={self.alpha:g}, sigma={self.sigma:.4f}, tau={self.tau:.4f})"
        )


# -----------------------------
# Covariance structure
# -----------------------------
@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """
    Symmetric positive definite covariance matrix C of (X_1, .., X_n).
    Construct through covariance.as_covariance(), which validates and freezes
    the array.
    """
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.entries)


@dataclass(frozen=True, eq=False)
class ConditionalDecomposition:
    """
    Sequential conditional decomposition X_i = E_i + R_i under an ordering.

    ordering      : permutation of 0..dim-1; position p holds variable ordering[p]
    residual_vars : sigma_i^2 = Var R_i, indexed by position
    condmean_vars : tau_i^2 = Var E_i, indexed by position
    lower_factor  : L with P C P' = L L'
    """
    ordering: Tuple[int, ...]
    residual_vars: np.ndarray
    condmean_vars: np.ndarray
    lower_factor: np.ndarray

    @property
    def sigma2(self) -> float:
        return float(np.min(self.residual_vars))

    @property
    def tau2(self) -> float:
        return float(np.max(self.condmean_vars))


# -----------------------------
# Stationary processes
# -----------------------------
@dataclass(frozen=True)
class WoldModel:
    """
    Truncated Wold representation X_i = sd * (Z_i + sum_j psi_j Z_{i-j}).

    innovation_sd   : standard deviation of the innovations Z_i (scaled)
    psi             : psi_1..psi_K (psi_0 = 1 implicit)
    truncation_tail : variance sd^2 * sum_{j>K} psi_j^2 that was discarded
    tail_tol        : the tolerance the truncation was chosen against
    kind            : how the model was built
    """
    innovation_sd: float
    psi: Tuple[float, ...]
    truncation_tail: float
    tail_tol: float
    kind: ProcessKind = ProcessKind.PSI_LIST

    @property
    def innovation_var(self) -> float:
        return self.innovation_sd ** 2

    @property
    def order(self) -> int:
        return len(self.psi)

    def ma_coefficients(self) -> np.ndarray:
        """psi_0..psi_K as an array (psi_0 = 1)."""
        return np.concatenate(([1.0], np.asarray(self.psi, dtype=float)))


@dataclass(frozen=True)
class ProcessWindow:
    """Subsampled window (X_k, X_2k, .., X_nk) of a stationary process."""
    model: WoldModel
    n: int
    k: int = 1


# -----------------------------
# Monte Carlo harness
# -----------------------------
Target = Union[CovarianceMatrix, ProcessWindow]


@dataclass(frozen=True)
class SimulationPlan:
    """
    Seeded simulation request.

    seed         : 64-bit seed; replication i uses a stream derived from (seed, i)
    replications : number of independent replications
    target       : covariance matrix or process window to sample
    thresholds   : thresholds at which tail probabilities are estimated
    workers      : thread count; never changes results
    chunk_size   : replications per work unit
    """
    seed: int
    replications: int
    target: Optional[Target] = None
    thresholds: Tuple[float, ...] = ()
    workers: int = 1
    chunk_size: int = 2048


@dataclass(frozen=True)
class TailEstimate:
    """Empirical Pr{M >= threshold} with a Wilson score interval."""
    threshold: float
    hits: int
    replications: int
    point: float
    ci_low: float
    ci_high: float


@dataclass
class CheckRecord:
    """
    One inequality check against simulation.

    bound    : the value the inequality asserts (a lower or upper bound)
    estimate : the empirical point estimate compared with it
    slack    : estimate - bound for lower bounds, bound - estimate for upper
    passed   : False only on statistically exclusionary evidence
    """
    label: str
    bound: float
    estimate: float
    ci_low: float
    ci_high: float
    slack: float
    passed: bool
    detail: str = ""


@dataclass
class VerdictReport:
    """
    Container for the checks of one certification run.

    details: convenience numbers (statistics, sample sizes, exact values).
    """
    name: str
    checks: List[CheckRecord] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> str:
        """One-line human-readable summary."""
        if not self.checks:
            return f"{self.name}: no checks."
        failed = sum(1 for c in self.checks if not c.passed)
        status = "PASS" if failed == 0 else f"FAIL ({failed}/{len(self.checks)})"
        worst = min(self.checks, key=lambda c: c.slack)
        return f"{self.name}: {status}; min slack {worst.slack:.4f} at {worst.label}"


@dataclass
class CommandReport:
    """
    Result of one CLI command, ready for export.

    inputs  : validated arguments, as recorded in the report
    outputs : headline scalars
    tables  : named pandas DataFrames; the first one is the CSV table
    verdicts: verdict reports of any checks the command ran
    """
    command: Command
    inputs: Dict[str, Any] = field(default_factory=dict)
    outputs: Dict[str, Any] = field(default_factory=dict)
    tables: Dict[str, Any] = field(default_factory=dict)
    verdicts: List[VerdictReport] = field(default_factory=list)
    seed: Optional[int] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)


# -----------------------------
# Command-line run configuration
# -----------------------------
@dataclass
class RunConfig:
    """
    Everything one CLI invocation needs. Validated by the cli before any
    computation.
    """
    command: Command
    n: Optional[int] = None
    alpha: float = 0.25
    k: Optional[int] = None
    k_max: Optional[int] = None
    seed: int = 20240101
    replications: int = 100_000
    workers: int = 1
    lambda_min: Optional[float] = None
    lambda_max: Optional[float] = None
    cov_path: Optional[str] = None
    process_path: Optional[str] = None
    ordering: str = "natural"
    probabilities: Tuple[float, ...] = ()
    scan_over: str = "n"
    scan_values: Tuple[float, ...] = ()
    thresholds: Tuple[float, ...] = (2.0, 2.5, 3.0)
    output_format: OutputFormat = OutputFormat.JSON
    out_path: Optional[str] = None
    strict: bool = False
    timestamp: bool = True


# Friendly export list
__all__ = [
    "Command",
    "OutputFormat",
    "Coupling",
    "ProcessKind",
    "TailPoint",
    "GridSweep",
    "MaxQuery",
    "QuantileBracket",
    "LowerBoundCertificate",
    "CovarianceMatrix",
    "ConditionalDecomposition",
    "WoldModel",
    "ProcessWindow",
    "Target",
    "SimulationPlan",
    "TailEstimate",
    "CheckRecord",
    "VerdictReport",
    "CommandReport",
    "RunConfig",
]
