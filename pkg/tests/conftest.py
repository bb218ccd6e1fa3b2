# tests/conftest.py
# ------------------------------------------------------------
# Independent oracles for the test suite.
#
# - Phi and its upper tail in 80-digit decimal arithmetic: Taylor series
#   for |x| <= 4, Laplace continued fraction beyond. Shares no code with
#   scipy.special.
# - The bivariate (2x2, correlation rho) quantities of the conditional
#   decomposition inequality, by one-dimensional quadrature.
#
from __future__ import annotations

import math
from decimal import Decimal, localcontext

import numpy as np
import pytest
from scipy import integrate, special

_PREC = 80
_PI = Decimal(
    "3.14159265358979323846264338327950288419716939937510"
    "58209749445923078164062862089986280348253421170679"
)


def _pdf_dec(x: Decimal) -> Decimal:
    return (-(x * x) / 2).exp() / (2 * _PI).sqrt()


def _series_cdf(x: Decimal) -> Decimal:
    # Phi(x) = 1/2 + phi(x) * sum_k x^(2k+1) / (1 * 3 * .. * (2k+1))
    term = x
    total = x
    k = 0
    eps = Decimal(10) ** (-(_PREC + 5))
    while abs(term) > eps:
        k += 1
        term = term * x * x / (2 * k + 1)
        total += term
    return Decimal(1) / 2 + _pdf_dec(x) * total


def _cf_tail(x: Decimal) -> Decimal:
    # 1 - Phi(x) = phi(x) / (x + 1/(x + 2/(x + 3/(x + ..)))), x > 0
    depth = 2000 if x < 8 else 400
    acc = x
    for k in range(depth, 0, -1):
        acc = x + k / acc
    return _pdf_dec(x) / acc


def oracle_tail(x: float) -> Decimal:
    """1 - Phi(x) to ~60 significant digits."""
    with localcontext() as ctx:
        ctx.prec = _PREC
        d = Decimal(repr(float(x)))
        if d > 4:
            return +_cf_tail(d)
        if d < -4:
            return 1 - _cf_tail(-d)
        return 1 - _series_cdf(d)


def oracle_cdf(x: float) -> Decimal:
    """Phi(x) to ~60 significant digits."""
    with localcontext() as ctx:
        ctx.prec = _PREC
        return 1 - oracle_tail(x)


def oracle_log_tail(x: float) -> float:
    with localcontext() as ctx:
        ctx.prec = _PREC
        return float(oracle_tail(x).ln())


def oracle_iid_max_tail(n: int, a: float) -> float:
    """Pr{max of n i.i.d. N(0,1) >= a} = 1 - Phi(a)^n."""
    with localcontext() as ctx:
        ctx.prec = _PREC
        return float(1 - oracle_cdf(a) ** n)


# -----------------------------
# Bivariate oracle
# -----------------------------
def bivariate_max_tail_quad(rho: float, t: float) -> float:
    """Pr{max(X1, X2) >= t}, unit variances, correlation rho, by quadrature."""
    s = math.sqrt(1.0 - rho * rho)
    inner, _ = integrate.quad(
        lambda z: math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi) * special.ndtr((t - rho * z) / s),
        -np.inf,
        t,
        epsabs=1e-13,
        epsrel=1e-12,
    )
    return 1.0 - inner


def bivariate_hi_rhs(rho: float, a: float, b: float) -> float:
    """
    Pr{max R_i >= A} * min_i Pr{E_i >= B} in natural order:
    R = (Z1, s Z2), E = (0, rho Z1), s = sqrt(1 - rho^2), B <= 0.
    """
    s = math.sqrt(1.0 - rho * rho)
    max_r = 1.0 - special.ndtr(a) * special.ndtr(a / s)
    min_e = min(1.0, 1.0 - special.ndtr(b / rho))
    return float(max_r * min_e)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
