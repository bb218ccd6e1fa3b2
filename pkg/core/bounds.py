# core/bounds.py
# ------------------------------------------------------------
# Distributional bounds on the maximum M_n of n Gaussian variables.
#
# What this file provides
# -----------------------
# - Union bound on the upper tail (any dependence):
#       Pr{M_n >= A} <= n (1 - F(A))
# - Coupling transforms of M_n
#       exponential:  -log n - log(1 - F(M_n)) <= E          (any dependence)
#       Gumbel     :  G = -log(-n log F(M_n))                (independent)
#   and the sandwich  G <= -log(n (1 - F(M_n))) <= G + exp(-G)/n
# - Quantile brackets for M_n^2
#       independent:  (N + 2G) - log(N + 2G) <= M_n^2 <= W - log W + log W/W,
#                     W = N + 2G + 2 exp(-G)/n
#       dependent  :  M_n^2 <= max(1, S - log S + log S/S),  S = N + 2E
# - The lower-bound certificate for dependent Gaussians
#       Pr{M_n >= sigma sqrt(N + L_a - log(N + L_a)) + tau Phi^-1(alpha)} >= 1 - 2 alpha
#   valid when N + L_a >= 6, and its eigenvalue (headline) special case at
#   alpha = 1/4.
#
# Notation
# --------
# N   = log(n^2 / 2 pi) = 2 log n - log 2 pi
# L_a = -2 log(-log alpha)
#
# All formulas in natural logs and double precision.
#
from __future__ import annotations

from math import ceil, exp, expm1, isfinite, log, log1p, sqrt
from typing import Callable, Tuple, Union

import numpy as np
from scipy import special

from .errors import DomainError, GateError
from .gaussian import LOG_2PI, invert_v_upper, std_normal_quantile
from .models import Coupling, LowerBoundCertificate, MaxQuery, QuantileBracket
from .settings import DEFAULT_SETTINGS, Settings

ArrayLike = Union[float, np.ndarray]

GATE = 6.0                # N + L_alpha must reach this value
HEADLINE_ALPHA = 0.25
HEADLINE_MIN_N = 70
# N + L_{1/4} = 2 log n - HEADLINE_OFFSET exactly
HEADLINE_OFFSET = LOG_2PI + 2.0 * log(log(4.0))


# -----------------------------
# Helpers (public)
# -----------------------------
def max_query(n: int) -> MaxQuery:
    """Validated MaxQuery for n >= 1 variables."""
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer.")
    return MaxQuery(n=int(n))


def l_alpha(alpha: float) -> float:
    """L_alpha = -2 log(-log alpha), the Gumbel 2G quantile at level alpha."""
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1).")
    return -2.0 * log(-log(alpha))


def smallest_valid_n(alpha: float) -> int:
    """Least n with N + L_alpha >= 6."""
    la = l_alpha(alpha)
    n = max(1, int(ceil(exp((GATE + LOG_2PI - la) / 2.0))))
    # guard the ceil against rounding on either side
    while n > 1 and 2.0 * log(n - 1) - LOG_2PI + la >= GATE:
        n -= 1
    while 2.0 * log(n) - LOG_2PI + la < GATE:
        n += 1
    return n


def _check_probability(p: float, name: str = "p") -> float:
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"{name} must lie in the open interval (0, 1).")
    return p


# -----------------------------
# Upper tails (any dependence)
# -----------------------------
def union_upper_tail(n: int, single_tail: ArrayLike) -> ArrayLike:
    """
    min(1, n * single_tail): an upper bound on Pr{M_n >= A} for ANY
    dependence, where single_tail = 1 - F(A).
    """
    arr = np.asarray(single_tail, dtype=float)
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        raise DomainError("single_tail must lie in [0, 1].")
    out = np.minimum(1.0, max_query(n).n * arr)
    return float(out) if out.ndim == 0 else out


# -----------------------------
# Coupling variables
# -----------------------------
def gumbel_quantile(p: float) -> float:
    """p-quantile of the standard Gumbel law, -log(-log p)."""
    p = _check_probability(p)
    return -log(-log(p))


def exponential_quantile(p: float) -> float:
    """p-quantile of the unit exponential law, -log(1 - p)."""
    p = _check_probability(p)
    return -log1p(-p)


def gumbel_transform_of_max(
    m: float,
    n: int,
    cdf_single: Callable[[float], float],
) -> float:
    """
    G(m) = -log(-n log F(m)).

    When m is the maximum of n independent draws from F, G(m) is exactly
    Gumbel distributed.

    Raises
    ------
    DomainError
        If F(m) is 0 or 1.
    """
    q = max_query(n)
    f = float(cdf_single(m))
    if not 0.0 < f < 1.0:
        raise DomainError("cdf_single(m) must lie strictly between 0 and 1.")
    return -log(-q.n * log(f))


def gaussian_gumbel_transform(m: ArrayLike, n: int) -> ArrayLike:
    """
    G(m) for F = Phi, from log Phi(m) so that maxima deep in the upper tail do
    not collapse to F(m) = 1. Vectorized.
    """
    q = max_query(n)
    log_f = special.log_ndtr(np.asarray(m, dtype=float))
    if not np.all(log_f < 0.0) or not np.all(np.isfinite(log_f)):
        raise DomainError("Phi(m) must lie strictly between 0 and 1.")
    g = -np.log(-q.n * log_f)
    return float(g) if np.ndim(g) == 0 else g


def exponential_transform_of_max(m: ArrayLike, n: int, log_tail_single: Callable) -> ArrayLike:
    """
    -log n - log(1 - F(m)); the left side of the exponential coupling
    inequality, bounded above by an exponential variable E for any
    dependence. ``log_tail_single`` returns log(1 - F).
    """
    q = max_query(n)
    lt = np.asarray(log_tail_single(m), dtype=float)
    out = -log(q.n) - lt
    return float(out) if out.ndim == 0 else out


def coupling_sandwich(
    g: ArrayLike,
    n: int,
    log_tail: ArrayLike,
    *,
    settings: Settings = DEFAULT_SETTINGS,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Check  g <= -log(n (1 - F)) <= g + exp(-g)/n  pointwise.

    Parameters
    ----------
    g        : Gumbel transform value(s)
    n        : number of variables
    log_tail : log(1 - F(m)) at the same point(s)

    Returns
    -------
    (lower_ok, upper_ok) boolean arrays
    """
    q = max_query(n)
    g = np.asarray(g, dtype=float)
    mid = -log(q.n) - np.asarray(log_tail, dtype=float)
    tol = settings.sandwich_tol
    lower_ok = g <= mid + tol
    upper_ok = mid <= g + np.exp(-g) / q.n + tol
    return lower_ok, upper_ok


# -----------------------------
# M_n^2 brackets
# -----------------------------
def independent_msq_bracket(q: MaxQuery, g: float) -> QuantileBracket:
    """
    Bracket for M_n^2 of n independent unit Gaussians at Gumbel value g:

        (N + 2g) - log(N + 2g)  <=  M_n^2  <=  W - log W + log W / W
        W = N + 2g + 2 exp(-g) / n

    regime_ok is True when the lower end already implies M_n >= 2, the range
    where the lower inversion is certified.

    Raises
    ------
    DomainError
        If N + 2g <= 1.
    """
    s = q.big_n + 2.0 * g
    if not isfinite(s) or s <= 1.0:
        raise DomainError("independent_msq_bracket requires N + 2g > 1.")
    lower = s - log(s)
    upper = float(invert_v_upper(s + 2.0 * exp(-g) / q.n))
    return QuantileBracket(
        coupling=Coupling.GUMBEL,
        coupling_value=float(g),
        msq_lower=lower,
        msq_upper=upper,
        regime_ok=lower >= 4.0,
    )


def dependent_msq_upper(q: MaxQuery, e: float) -> float:
    """
    Upper bound for M_n^2 of n unit Gaussians with ANY dependence:

        M_n^2 <= max(1, S - log S + log S / S),   S = N + 2e

    Degenerate S <= 1 gives 1.
    """
    if e < 0.0:
        raise DomainError("e must be >= 0.")
    s = q.big_n + 2.0 * e
    if s <= 1.0:
        return 1.0
    return max(1.0, float(invert_v_upper(s)))


def dependent_msq_bracket(q: MaxQuery, e: float) -> QuantileBracket:
    """QuantileBracket view of dependent_msq_upper (no lower end)."""
    upper = dependent_msq_upper(q, e)
    return QuantileBracket(
        coupling=Coupling.EXPONENTIAL,
        coupling_value=float(e),
        msq_lower=None,
        msq_upper=upper,
        regime_ok=q.big_n + 2.0 * e > 1.0,
    )


def exact_iid_max_quantile(n: int, p: float) -> float:
    """
    Exact p-quantile of the maximum of n independent unit Gaussians,
    Phi^-1(p^(1/n)), with the tail 1 - p^(1/n) formed through expm1.
    """
    q = max_query(n)
    p = _check_probability(p)
    tail = -expm1(log(p) / q.n)
    return -float(std_normal_quantile(tail))


# -----------------------------
# Lower-bound certificate
# -----------------------------
def lower_bound_certificate(
    n: int,
    alpha: float,
    sigma: float,
    tau: float,
    *,
    source: str = "",
) -> LowerBoundCertificate:
    """
    Certificate Pr{M_n >= t} >= 1 - 2 alpha with

        t = sigma sqrt(N + L_a - log(N + L_a)) + tau Phi^-1(alpha)

    Phi^-1(alpha) < 0 for alpha < 1/2, so the tau term lowers t.

    Parameters
    ----------
    n     : number of variables
    alpha : tail parameter in (0, 1/2)
    sigma : minimum residual standard deviation, > 0
    tau   : maximum conditional-mean standard deviation, >= 0

    Raises
    ------
    DomainError
        alpha outside (0, 1/2), sigma <= 0 or tau < 0.
    GateError
        N + L_alpha < 6.
    """
    q = max_query(n)
    alpha = float(alpha)
    if not 0.0 < alpha < 0.5:
        raise DomainError("alpha must lie in (0, 1/2); at alpha >= 1/2 the bound 1 - 2 alpha is vacuous.")
    if not (isfinite(sigma) and sigma > 0.0):
        raise DomainError("sigma must be > 0.")
    if not (isfinite(tau) and tau >= 0.0):
        raise DomainError("tau must be >= 0.")

    la = l_alpha(alpha)
    s = q.big_n + la
    if s < GATE:
        n_min = smallest_valid_n(alpha)
        raise GateError(
            f"requires N + L_alpha >= 6 (got {s:.4f} at n={q.n}); "
            f"smallest valid n at alpha={alpha:g} is {n_min}",
            smallest_n=n_min,
        )

    threshold = sigma * sqrt(s - log(s)) + tau * float(std_normal_quantile(alpha))
    return LowerBoundCertificate(
        n=q.n,
        alpha=alpha,
        l_alpha=la,
        sigma=float(sigma),
        tau=float(tau),
        threshold=threshold,
        guaranteed_tail=1.0 - 2.0 * alpha,
        source=source,
    )


def headline_bound(n: int, lambda_min: float, lambda_max: float) -> LowerBoundCertificate:
    """
    The alpha = 1/4 certificate from the covariance eigenvalues:
    sigma = sqrt(lambda_min), tau = sqrt(lambda_max); valid for n >= 70 and
    guaranteeing Pr{M_n >= t} >= 1/2.

    Raises
    ------
    GateError
        n < 70.
    DomainError
        lambda_min <= 0 or lambda_max < lambda_min.
    """
    if n < HEADLINE_MIN_N:
        raise GateError(
            f"requires N + L_alpha >= 6; smallest valid n at alpha=0.25 is {HEADLINE_MIN_N} (got n={n})",
            smallest_n=HEADLINE_MIN_N,
        )
    if not lambda_min > 0.0:
        raise DomainError("lambda_min must be > 0.")
    if lambda_max < lambda_min:
        raise DomainError("lambda_max must be >= lambda_min.")
    return lower_bound_certificate(
        n, HEADLINE_ALPHA, sqrt(lambda_min), sqrt(lambda_max), source="eigenvalues"
    )


def headline_display_threshold(n: int, lambda_min: float, lambda_max: float) -> float:
    """
    The headline threshold with its rounded constants 2.5 and 0.68:

        sqrt(lmin) sqrt(2 log n - 2.5 - log(2 log n - 2.5)) - 0.68 sqrt(lmax)
    """
    s = 2.0 * log(max_query(n).n) - 2.5
    if s <= 1.0:
        raise DomainError("2 log n - 2.5 must exceed 1.")
    return sqrt(lambda_min) * sqrt(s - log(s)) - 0.68 * sqrt(lambda_max)


def first_order_level(n: int, sigma: float = 1.0) -> float:
    """sqrt(2 sigma^2 log n), the first-order size of M_n."""
    return sqrt(2.0 * sigma * sigma * log(max_query(n).n))


__all__ = [
    "GATE",
    "HEADLINE_ALPHA",
    "HEADLINE_MIN_N",
    "HEADLINE_OFFSET",
    "max_query",
    "l_alpha",
    "smallest_valid_n",
    "union_upper_tail",
    "gumbel_quantile",
    "exponential_quantile",
    "gumbel_transform_of_max",
    "gaussian_gumbel_transform",
    "exponential_transform_of_max",
    "coupling_sandwich",
    "independent_msq_bracket",
    "dependent_msq_upper",
    "dependent_msq_bracket",
    "exact_iid_max_quantile",
    "lower_bound_certificate",
    "headline_bound",
    "headline_display_threshold",
    "first_order_level",
]
