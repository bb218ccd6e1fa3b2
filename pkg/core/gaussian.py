# core/gaussian.py
# ------------------------------------------------------------
# Standard-normal evaluation and the tail-inversion machinery.
#
# What this file provides
# -----------------------
# - pdf, cdf, upper tail and log upper tail of the standard normal
# - quantile function (bracketing root finder + one Newton polish)
# - the V statistic  V = -2 log(1 - Phi(x)) - log(2 pi)  and its inversion
#   inequalities:
#       x >= 2 :  V - log V <= x^2
#       x >= 1 :  x^2 <= V - log V + log V / V
# - the Mills-ratio bracket for 1 - Phi(x), x >= 1, in both the
#   probability, log and V forms
# - vectorized grid sweeps that certify the inequalities numerically, and a
#   round-trip sweep through the exact inversion invert_tail_v
#
# Precision notes
# ---------------
# - The upper tail is evaluated as Phi(-x) and its logarithm through
#   scipy.special.log_ndtr, which switches to an asymptotic expansion in the
#   far tail. V therefore stays finite up to x = 40 and beyond, where the
#   naive 1 - Phi(x) underflows near x = 8.3.
# - Every function accepts a float or a numpy array; scalars come back as
#   Python floats.
#
from __future__ import annotations

from math import log, pi
from typing import Optional, Tuple, Union

import numpy as np
from scipy import optimize, special

from .errors import DomainError
from .models import GridSweep, TailPoint
from .settings import DEFAULT_SETTINGS, Settings

ArrayLike = Union[float, np.ndarray]

LOG_2PI = log(2.0 * pi)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * pi)


# -----------------------------
# Helpers (private)
# -----------------------------
def _as_array(x: ArrayLike, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite.")
    return arr


def _unwrap(arr: np.ndarray) -> ArrayLike:
    if np.ndim(arr) == 0:
        return float(arr)
    return arr


# -----------------------------
# Density, distribution, tail
# -----------------------------
def std_normal_pdf(x: ArrayLike) -> ArrayLike:
    """phi(x) = exp(-x^2 / 2) / sqrt(2 pi)."""
    arr = _as_array(x)
    return _unwrap(_INV_SQRT_2PI * np.exp(-0.5 * arr * arr))


def std_normal_cdf(x: ArrayLike) -> ArrayLike:
    """
    Phi(x), monotone nondecreasing.

    Raises
    ------
    DomainError
        If x is not finite.
    """
    return _unwrap(special.ndtr(_as_array(x)))


def std_normal_tail(x: ArrayLike) -> ArrayLike:
    """1 - Phi(x), computed as Phi(-x) so there is no cancellation for x > 0."""
    return _unwrap(special.ndtr(-_as_array(x)))


def std_normal_log_tail(x: ArrayLike) -> ArrayLike:
    """
    log(1 - Phi(x)) without underflow.

    Accurate to about 1e-13 relative well beyond x = 40, where 1 - Phi(x)
    itself is far below the smallest double.
    """
    return _unwrap(special.log_ndtr(-_as_array(x)))


# -----------------------------
# Quantile
# -----------------------------
def _newton_polish(x: np.ndarray, q: np.ndarray) -> np.ndarray:
    # Newton step on log Phi(x) = log q; same fixed point as Phi(x) = q but
    # well scaled for q down to the smallest doubles.
    step = (special.log_ndtr(x) - np.log(q)) * special.ndtr(x) / (
        _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    )
    return x - step


def _lower_quantile_scalar(q: float) -> float:
    if q == 0.5:
        return 0.0
    target = log(q)
    root = optimize.brentq(
        lambda t: float(special.log_ndtr(t)) - target,
        -40.0,
        0.0,
        xtol=1e-14,
        rtol=4.0 * np.finfo(float).eps,
        maxiter=200,
    )
    return float(_newton_polish(np.asarray(root), np.asarray(q)))


def std_normal_quantile(p: ArrayLike) -> ArrayLike:
    """
    Phi^-1(p) for 0 < p < 1, odd around p = 1/2.

    Scalars are found by a bracketing root finder (Brent) on log Phi over
    [-40, 0]; arrays start from scipy.special.ndtri. Both finish with one
    Newton polish on the shipped CDF, so std_normal_cdf(result) = p to about
    1e-12 absolute. The upper half is obtained by reflection, q(1-p) = -q(p).

    Raises
    ------
    DomainError
        If any p lies outside the open unit interval.
    """
    arr = np.asarray(p, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError("p must lie in the open interval (0, 1).")

    upper = arr > 0.5
    q = np.where(upper, 1.0 - arr, arr)
    if q.ndim == 0:
        x = _lower_quantile_scalar(float(q))
        return -x if bool(upper) else x

    x = special.ndtri(q)
    interior = q < 0.5
    x = np.where(interior, _newton_polish(np.where(interior, x, -1.0), q), 0.0)
    return np.where(upper, -x, x)


# -----------------------------
# V statistic and its inversion
# -----------------------------
def tail_v(x: ArrayLike) -> ArrayLike:
    """
    V = -2 log(1 - Phi(x)) - log(2 pi), strictly increasing in x.

    V(0) = 2 log 2 - log 2 pi, and V = 0 where 1 - Phi(x) = (2 pi)^(-1/2).
    """
    log_tail = special.log_ndtr(-_as_array(x))
    return _unwrap(-2.0 * log_tail - LOG_2PI)


def tail_point(x: float) -> TailPoint:
    """Bundle x, y = x^2 and V(x)."""
    x = float(x)
    return TailPoint(x=x, y=x * x, v=float(tail_v(x)))


def _check_v(v: ArrayLike) -> np.ndarray:
    arr = _as_array(v, "v")
    if not np.all(arr > 1.0):
        raise DomainError("v must be > 1 so that log v is positive.")
    return arr


def invert_v_lower(v: ArrayLike) -> ArrayLike:
    """
    Lower bound for x^2 from V:  V - log V.

    Guaranteed <= x^2 whenever v = tail_v(x) and x >= 2.
    """
    arr = _check_v(v)
    return _unwrap(arr - np.log(arr))


def invert_v_upper(v: ArrayLike) -> ArrayLike:
    """
    Upper bound for x^2 from V:  V - log V + log V / V.

    Guaranteed >= x^2 whenever v = tail_v(x) and x >= 1.
    """
    arr = _check_v(v)
    lv = np.log(arr)
    return _unwrap(arr - lv + lv / arr)


def invert_tail_v(v: float) -> float:
    """
    The abscissa x with tail_v(x) = v, by bracketing and Brent's method.

    Raises
    ------
    DomainError
        If v is not above -log(2 pi), the infimum of V.
    """
    v = float(v)
    if not np.isfinite(v) or v <= -LOG_2PI:
        raise DomainError("v must be finite and greater than -log(2 pi).")

    lo, hi = -1.0, 1.0
    while tail_v(lo) > v:
        lo *= 2.0
        if lo < -64.0:
            raise DomainError("v is too close to -log(2 pi) to invert.")
    while tail_v(hi) < v:
        hi *= 2.0
        if hi > 1e4:
            raise DomainError("v is too large to invert.")
    return float(optimize.brentq(lambda t: tail_v(t) - v, lo, hi, xtol=1e-13, maxiter=200))


# -----------------------------
# Mills-ratio bracket
# -----------------------------
def log_mills_bracket(x: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """
    The Mills bracket in the log domain, finite up to x = 40 and beyond:

        log phi(x) - log x + log(1 - 1/x^2)          (lower; -inf at x = 1)
        log phi(x) - log x + log(1 - 1/x^2 + 3/x^4)  (upper)

    Raises
    ------
    DomainError
        If x < 1, where the bracket is not asserted.
    """
    arr = _as_array(x)
    if not np.all(arr >= 1.0):
        raise DomainError("mills_bracket requires x >= 1.")
    log_base = -0.5 * arr * arr - np.log(arr) - 0.5 * LOG_2PI
    inv2 = 1.0 / (arr * arr)
    with np.errstate(divide="ignore"):
        lower = log_base + np.log1p(-inv2)
    upper = log_base + np.log1p(-inv2 + 3.0 * inv2 * inv2)
    return _unwrap(lower), _unwrap(upper)


def mills_bracket(x: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """
    Two-sided bound on the normal tail for x >= 1:

        phi(x)/x (1 - 1/x^2)  <=  1 - Phi(x)  <=  phi(x)/x (1 - 1/x^2 + 3/x^4)

    Evaluated through log_mills_bracket and rounded outward by two ulps, so the
    float pair still brackets the tail where it is subnormal (x > ~37.5) or
    underflows (the upper end is then the smallest positive double).

    Returns
    -------
    (lower, upper)

    Raises
    ------
    DomainError
        If x < 1, where the bracket is not asserted.
    """
    log_lower, log_upper = log_mills_bracket(x)
    lower = np.nextafter(np.nextafter(np.exp(log_lower), 0.0), 0.0)
    upper = np.nextafter(np.nextafter(np.exp(log_upper), np.inf), np.inf)
    return _unwrap(lower), _unwrap(upper)


def v_bracket(y: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """
    The Mills bracket rewritten for V with y = x^2 > 1:

        y + log y - 2 log(1 - 1/y + 3/y^2)  <=  V  <=  y + log y - 2 log(1 - 1/y)
    """
    arr = _as_array(y, "y")
    if not np.all(arr > 1.0):
        raise DomainError("v_bracket requires y > 1.")
    base = arr + np.log(arr)
    lower = base - 2.0 * np.log(1.0 - 1.0 / arr + 3.0 / (arr * arr))
    upper = base - 2.0 * np.log1p(-1.0 / arr)
    return _unwrap(lower), _unwrap(upper)


# -----------------------------
# Grid sweeps
# -----------------------------
def abscissa_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive grid start, start + step, .., stop without accumulated drift."""
    if step <= 0.0 or stop < start:
        raise DomainError("grid needs step > 0 and stop >= start.")
    count = int(round((stop - start) / step)) + 1
    return np.round(start + step * np.arange(count), 12)


def _summarise(name: str, xs: np.ndarray, margin: np.ndarray, tol: float, step: float) -> GridSweep:
    worst = int(np.argmin(margin))
    return GridSweep(
        name=name,
        start=float(xs[0]),
        stop=float(xs[-1]),
        step=step,
        points=int(xs.size),
        violations=int(np.count_nonzero(margin < -tol)),
        worst_margin=float(margin[worst]),
        worst_at=float(xs[worst]),
    )


def sweep_inversion_bounds(
    side: str,
    start: Optional[float] = None,
    stop: float = 40.0,
    step: Optional[float] = None,
    *,
    settings: Settings = DEFAULT_SETTINGS,
) -> GridSweep:
    """
    Check one inversion inequality on an abscissa grid.

    side = "lower":  V - log V <= x^2                   (default start 2)
    side = "upper":  x^2 <= V - log V + log V / V       (default start 1)

    The margin is the relative slack (bound gap / x^2); a point is a
    violation when the margin is below -settings.grid_rel_tol.
    """
    key = (side or "").strip().lower()
    if key not in ("lower", "upper"):
        raise DomainError(f"Unknown side '{side}'. Expected lower | upper.")
    if start is None:
        start = 2.0 if key == "lower" else 1.0
    step = settings.grid_step if step is None else step

    xs = abscissa_grid(start, stop, step)
    y = xs * xs
    v = -2.0 * special.log_ndtr(-xs) - LOG_2PI
    lv = np.log(v)
    if key == "lower":
        margin = (y - (v - lv)) / y
    else:
        margin = ((v - lv + lv / v) - y) / y
    return _summarise(f"inversion-{key}", xs, margin, settings.grid_rel_tol, step)


def sweep_mills_bracket(
    start: float = 1.0,
    stop: float = 40.0,
    step: Optional[float] = None,
    *,
    settings: Settings = DEFAULT_SETTINGS,
) -> GridSweep:
    """
    Check lower <= 1 - Phi(x) <= upper on a grid, in the log domain so the far
    tail does not underflow. The margin is the smaller of the two relative
    slacks.
    """
    step = settings.grid_step if step is None else step
    xs = abscissa_grid(start, stop, step)
    if xs[0] < 1.0:
        raise DomainError("mills sweep requires start >= 1.")

    log_tail = special.log_ndtr(-xs)
    log_lower, log_upper = log_mills_bracket(xs)

    # relative slack of each side: 1 - lower/tail (lower is 0 at x = 1) and upper/tail - 1
    lower_ratio = np.exp(log_lower - log_tail)
    upper_ratio = np.exp(log_upper - log_tail)
    margin = np.minimum(1.0 - lower_ratio, upper_ratio - 1.0)
    return _summarise("mills-bracket", xs, margin, settings.grid_rel_tol, step)


def sweep_inversion_round_trip(
    start: float = 2.0,
    stop: float = 40.0,
    step: float = 0.1,
    *,
    settings: Settings = DEFAULT_SETTINGS,
) -> GridSweep:
    """
    Recover x from V = tail_v(x) with invert_tail_v and check it lies in
    [sqrt(V - log V), sqrt(V - log V + log V / V)]. The margin is the smaller
    relative distance to either end. One root solve per point, hence the
    coarser default step.
    """
    xs = abscissa_grid(start, stop, step)
    if xs[0] < 2.0:
        raise DomainError("round-trip sweep requires start >= 2.")
    v = tail_v(xs)
    roots = np.array([invert_tail_v(float(vi)) for vi in v])
    lower = np.sqrt(invert_v_lower(v))
    upper = np.sqrt(invert_v_upper(v))
    margin = np.minimum(roots - lower, upper - roots) / roots
    return _summarise("inversion-round-trip", xs, margin, settings.grid_rel_tol, step)


__all__ = [
    "LOG_2PI",
    "std_normal_pdf",
    "std_normal_cdf",
    "std_normal_tail",
    "std_normal_log_tail",
    "std_normal_quantile",
    "tail_v",
    "tail_point",
    "invert_v_lower",
    "invert_v_upper",
    "invert_tail_v",
    "log_mills_bracket",
    "mills_bracket",
    "v_bracket",
    "abscissa_grid",
    "sweep_inversion_bounds",
    "sweep_mills_bracket",
    "sweep_inversion_round_trip",
]
