# tests/test_gaussian.py
# ------------------------------------------------------------
# Standard-normal evaluation, quantile, V statistic and grid sweeps.
# Run:  pytest -q tests/test_gaussian.py
#
from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import oracle_cdf, oracle_log_tail, oracle_tail
from core.errors import DomainError
from core.gaussian import (
    LOG_2PI,
    abscissa_grid,
    invert_tail_v,
    invert_v_lower,
    invert_v_upper,
    log_mills_bracket,
    mills_bracket,
    std_normal_cdf,
    std_normal_log_tail,
    std_normal_pdf,
    std_normal_quantile,
    std_normal_tail,
    sweep_inversion_bounds,
    sweep_inversion_round_trip,
    sweep_mills_bracket,
    tail_point,
    tail_v,
    v_bracket,
)


@pytest.mark.parametrize("x", [-8.0, -3.0, -1.0, -0.25, 0.0, 0.5, 1.0, 2.1942, 3.0, 6.0])
def test_cdf_matches_oracle(x):
    """Phi agrees with the decimal oracle to 1e-14 absolute."""
    assert std_normal_cdf(x) == pytest.approx(float(oracle_cdf(x)), abs=1e-14)


@pytest.mark.parametrize("x", [0.0, 1.0, 2.5, 5.0, 8.5, 12.0, 20.0, 37.0])
def test_tail_matches_oracle_relatively(x):
    """1 - Phi(x) keeps full relative accuracy deep in the tail."""
    assert std_normal_tail(x) == pytest.approx(float(oracle_tail(x)), rel=1e-12)


@pytest.mark.parametrize("x", [1.0, 10.0, 38.5, 40.0])
def test_log_tail_far_beyond_underflow(x):
    assert std_normal_log_tail(x) == pytest.approx(oracle_log_tail(x), rel=1e-12)


def test_cdf_is_monotone_and_rejects_nan():
    xs = np.linspace(-10, 10, 2001)
    assert np.all(np.diff(std_normal_cdf(xs)) >= 0.0)
    with pytest.raises(DomainError):
        std_normal_cdf(float("nan"))


def test_pdf_at_zero():
    assert std_normal_pdf(0.0) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), rel=1e-15)


def test_quantile_headline_value():
    """Phi^-1(1/4), which the headline bound rounds to -0.68."""
    assert std_normal_quantile(0.25) == pytest.approx(-0.6744897501960817, abs=1e-12)
    assert std_normal_quantile(0.5) == 0.0


@pytest.mark.parametrize("p", [1e-300, 1e-10, 0.01, 0.3, 0.5, 0.9, 0.999999])
def test_quantile_round_trip(p):
    x = std_normal_quantile(p)
    assert std_normal_cdf(x) == pytest.approx(p, rel=1e-10)


@pytest.mark.parametrize("p", [1e-8, 0.05, 0.3])
def test_quantile_is_odd(p):
    assert std_normal_quantile(1.0 - p) == pytest.approx(-std_normal_quantile(p), abs=1e-9)


def test_quantile_array_matches_scalar():
    ps = np.array([1e-12, 1e-4, 0.1, 0.25, 0.5, 0.75, 0.99])
    arr = std_normal_quantile(ps)
    scal = np.array([std_normal_quantile(float(p)) for p in ps])
    np.testing.assert_allclose(arr, scal, rtol=0, atol=1e-12)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
def test_quantile_domain(p):
    with pytest.raises(DomainError):
        std_normal_quantile(p)


def test_tail_v_at_zero_and_monotone():
    assert tail_v(0.0) == pytest.approx(2.0 * math.log(2.0) - LOG_2PI, abs=1e-15)
    xs = np.linspace(-5, 40, 4501)
    assert np.all(np.diff(tail_v(xs)) > 0.0)


def test_tail_v_at_one_is_not_the_rounded_figure():
    """V(1) = -2 log(0.158655) - log 2 pi = 1.8442."""
    assert tail_v(1.0) == pytest.approx(1.8442, abs=1e-4)
    assert invert_v_upper(tail_v(1.0)) >= 1.0


def test_tail_point_bundles_coordinates():
    tp = tail_point(3.0)
    assert tp.y == 9.0
    assert tp.v == pytest.approx(tail_v(3.0))


@pytest.mark.parametrize("x", [2.0, 3.5, 10.0, 39.0])
def test_inversion_inequalities_pointwise(x):
    v = tail_v(x)
    assert invert_v_lower(v) <= x * x
    assert x * x <= invert_v_upper(v)


@pytest.mark.parametrize("v", [1.0, 0.5, -3.0])
def test_inversion_domain(v):
    with pytest.raises(DomainError):
        invert_v_lower(v)
    with pytest.raises(DomainError):
        invert_v_upper(v)


@pytest.mark.parametrize("x", [-1.0, 0.0, 1.5, 10.0, 35.0])
def test_invert_tail_v_round_trip(x):
    assert invert_tail_v(tail_v(x)) == pytest.approx(x, abs=1e-9)


def test_recovered_abscissa_lies_between_inversion_bounds():
    for x in abscissa_grid(2.0, 40.0, 0.25):
        v = tail_v(float(x))
        root = invert_tail_v(v)
        assert math.sqrt(invert_v_lower(v)) <= root + 1e-9
        assert root <= math.sqrt(invert_v_upper(v)) + 1e-9


def test_invert_tail_v_domain():
    with pytest.raises(DomainError):
        invert_tail_v(-LOG_2PI)


@pytest.mark.parametrize("x", [1.0, 1.5, 3.0, 10.0, 30.0])
def test_mills_bracket_contains_oracle(x):
    lo, hi = mills_bracket(x)
    t = float(oracle_tail(x))
    assert lo <= t <= hi


@pytest.mark.parametrize("x", [38.2, 38.3, 40.0])
def test_mills_bracket_holds_where_tail_is_subnormal(x):
    lo, hi = mills_bracket(x)
    t = oracle_tail(x)
    assert lo <= t <= hi
    assert hi > 0.0


@pytest.mark.parametrize("x", [1.5, 10.0, 38.2, 38.3, 40.0])
def test_log_mills_bracket_contains_log_tail(x):
    lo, hi = log_mills_bracket(x)
    t = oracle_log_tail(x)
    assert lo <= t <= hi


def test_log_mills_bracket_lower_end_at_one():
    lo, hi = log_mills_bracket(1.0)
    assert lo == -math.inf
    assert hi == pytest.approx(math.log(3.0 * std_normal_pdf(1.0)))


def test_mills_bracket_domain():
    with pytest.raises(DomainError):
        mills_bracket(0.5)


@pytest.mark.parametrize("x", [1.2, 2.0, 5.0, 20.0])
def test_v_bracket_contains_v(x):
    lo, hi = v_bracket(x * x)
    assert lo <= tail_v(x) <= hi


def test_v_bracket_domain():
    with pytest.raises(DomainError):
        v_bracket(1.0)


def test_abscissa_grid_endpoints():
    xs = abscissa_grid(2.0, 40.0, 0.01)
    assert xs.size == 3801
    assert xs[0] == 2.0 and xs[-1] == 40.0
    with pytest.raises(DomainError):
        abscissa_grid(1.0, 0.0, 0.01)


def test_sweeps_have_no_violations():
    lower = sweep_inversion_bounds("lower")
    upper = sweep_inversion_bounds("upper")
    mills = sweep_mills_bracket()
    assert (lower.points, upper.points, mills.points) == (3801, 3901, 3901)
    assert lower.ok and upper.ok and mills.ok
    assert lower.worst_margin >= 0.0


def test_round_trip_sweep():
    rt = sweep_inversion_round_trip()
    assert rt.points == 381
    assert rt.ok and rt.worst_margin > 0.0
    with pytest.raises(DomainError):
        sweep_inversion_round_trip(start=1.0)


def test_sweep_unknown_side():
    with pytest.raises(DomainError):
        sweep_inversion_bounds("middle")


def test_sweep_detects_violation_below_certified_range():
    """V - log V <= x^2 fails near x = 1 (outside the certified x >= 2)."""
    sweep = sweep_inversion_bounds("lower", start=1.0, stop=1.2)
    assert not sweep.ok
    assert sweep.worst_at == pytest.approx(1.0)
