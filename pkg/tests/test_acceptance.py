# tests/test_acceptance.py
# ------------------------------------------------------------
# End-to-end acceptance checks at full scale.
# The 10^5-replication runs are marked slow:  pytest -m "not slow"
#
from __future__ import annotations

import math

import numpy as np
import pytest

import maxbound_cli as cli
from conftest import bivariate_hi_rhs, bivariate_max_tail_quad, oracle_log_tail, oracle_tail
from core.bounds import (
    exact_iid_max_quantile,
    gumbel_quantile,
    independent_msq_bracket,
    l_alpha,
    max_query,
    smallest_valid_n,
)
from core.certify import run_certification_suite
from core.gaussian import (
    abscissa_grid,
    log_mills_bracket,
    mills_bracket,
    std_normal_quantile,
    sweep_inversion_bounds,
    sweep_mills_bracket,
)
from core.models import SimulationPlan
from core.montecarlo import asymptotic_ratio_medians
from core.process import ar1_model, stride_sweep

GRID_P = [round(0.05 * i, 2) for i in range(1, 20)]


def test_headline_gate_and_constants():
    assert smallest_valid_n(0.25) == 70
    for n in (70, 100, 1000, 10**6):
        gate = max_query(n).big_n + l_alpha(0.25)
        assert abs(gate - (2.0 * math.log(n) - 2.491146)) < 1e-6
    assert std_normal_quantile(0.25) == pytest.approx(-0.67449, abs=1e-5)


def test_inversion_grids_and_mills_bracket():
    assert sweep_inversion_bounds("lower").violations == 0
    assert sweep_inversion_bounds("upper").violations == 0
    assert sweep_mills_bracket().violations == 0
    for x in abscissa_grid(1.0, 40.0, 0.1):
        lo, hi = mills_bracket(float(x))
        t = oracle_tail(float(x))
        assert lo <= t <= hi
        log_lo, log_hi = log_mills_bracket(float(x))
        assert log_lo <= oracle_log_tail(float(x)) <= log_hi


@pytest.mark.parametrize("n", [100, 1000, 10_000])
def test_exact_quantile_inside_independent_bracket(n):
    q = max_query(n)
    checked = 0
    for p in GRID_P:
        br = independent_msq_bracket(q, gumbel_quantile(p))
        if br.regime_ok:
            assert br.contains(exact_iid_max_quantile(n, p) ** 2)
            checked += 1
    assert checked > 0


def test_bivariate_inequality_oracle_both_sides():
    rho, a, b = 0.6, 1.0, -1.0
    lhs = bivariate_max_tail_quad(rho, a + b)
    assert lhs == pytest.approx(0.75 - math.asin(rho) / (2.0 * math.pi), abs=1e-6)
    rhs = bivariate_hi_rhs(rho, a, b)
    assert rhs == pytest.approx(0.23572, abs=1e-4)
    assert lhs > rhs


def test_stride_pattern_rises_then_falls():
    sweep = stride_sweep(ar1_model(0.9), 10_000, 0.25, range(1, 61))
    thresholds = np.array([cert.threshold for _, cert in sweep])
    peak = int(np.argmax(thresholds))
    assert np.all(np.diff(thresholds[: peak + 1]) > 0.0)
    assert np.all(np.diff(thresholds[peak:]) < 0.0)


def test_suite_report_is_byte_identical_across_workers(capsys):
    argv = ["certify", "--reps", "2000", "--seed", "42", "--no-timestamp"]
    first_code = cli.main(argv)
    first = capsys.readouterr().out
    second_code = cli.main(argv + ["--workers", "4"])
    second = capsys.readouterr().out
    assert first_code == second_code
    assert first == second
    assert first.count("\"name\": ") >= 8


@pytest.mark.slow
def test_full_certification_suite():
    reports = run_certification_suite(20240101, 100_000, workers=4)
    failed = [r.summary() for r in reports if not r.passed]
    assert not failed
    for r in reports:
        if r.name.endswith("/lower-bound"):
            assert r.checks[0].estimate > 0.5


@pytest.mark.slow
def test_ar1_maxima_approach_first_order_level():
    """Medians of M_n / sqrt(2 log n) rise toward 1 with n."""
    rows = asymptotic_ratio_medians(ar1_model(0.9), [1000, 10_000, 100_000], SimulationPlan(seed=3, replications=500))
    ratios = [ratio for _, _, ratio in rows]
    assert ratios == sorted(ratios)
    assert ratios[-1] < 1.0
    assert ratios[-1] > 0.85
