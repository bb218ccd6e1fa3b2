# tests/test_covariance.py
# ------------------------------------------------------------
# Validation, sequential decomposition and spectral substitution.
#
from __future__ import annotations

import numpy as np
import pytest

from core.covariance import (
    ar1_toeplitz,
    as_covariance,
    decompose,
    eigen_bounds,
    eigen_substitution,
    equicorrelated,
    identity,
    load_covariance,
    precision_residuals,
    random_ordering,
    sigma_tau,
    toeplitz,
)
from core.errors import DecompositionError, DomainError, MatrixError
from core.models import CovarianceMatrix


def _random_spd(rng, dim):
    a = rng.standard_normal((dim, dim))
    return as_covariance(a @ a.T + 0.5 * np.eye(dim))


# -----------------------------
# Validation
# -----------------------------
@pytest.mark.parametrize(
    "entries",
    [
        [[1.0, 0.2, 0.0], [0.2, 1.0, 0.0]],  # not square
        [[1.0, 0.3], [0.2, 1.0]],  # asymmetric
        [[1.0, 2.0], [2.0, 1.0]],  # indefinite
        [[1.0, 1.0], [1.0, 1.0]],  # singular
        [[1.0, float("nan")], [float("nan"), 1.0]],
    ],
)
def test_as_covariance_rejects(entries):
    with pytest.raises(MatrixError):
        as_covariance(entries)


def test_as_covariance_freezes_entries():
    c = as_covariance([[2.0, 0.5], [0.5, 1.0]])
    assert c.dim == 2
    with pytest.raises(ValueError):
        c.entries[0, 0] = 3.0


def test_constructors():
    np.testing.assert_allclose(identity(3).entries, np.eye(3))
    eq = equicorrelated(4, 0.5)
    assert eq.entries[0, 3] == 0.5 and eq.entries[2, 2] == 1.0
    np.testing.assert_allclose(ar1_toeplitz(4, 0.5).entries[0], [1.0, 0.5, 0.25, 0.125])
    np.testing.assert_allclose(toeplitz([1.0, 0.3]).entries, [[1.0, 0.3], [0.3, 1.0]])
    with pytest.raises(DomainError):
        ar1_toeplitz(3, 1.0)


# -----------------------------
# Sequential decomposition
# -----------------------------
def test_identity_decomposition():
    dec = decompose(identity(5))
    assert dec.sigma2 == pytest.approx(1.0)
    assert dec.tau2 == 0.0
    assert sigma_tau(identity(5)) == pytest.approx((1.0, 0.0))


def test_equicorrelated_residuals_follow_closed_form():
    """sigma_i^2 = 1 - rho^2 (i-1) / (1 + (i-2) rho), i = 2..n."""
    rho, n = 0.5, 6
    dec = decompose(equicorrelated(n, rho))
    expected = [1.0] + [1.0 - rho * rho * (i - 1) / (1.0 + (i - 2) * rho) for i in range(2, n + 1)]
    np.testing.assert_allclose(dec.residual_vars, expected, rtol=1e-12)
    np.testing.assert_allclose(dec.residual_vars + dec.condmean_vars, np.ones(n), rtol=1e-12)


def test_ar1_residuals():
    dec = decompose(ar1_toeplitz(5, 0.9))
    np.testing.assert_allclose(dec.residual_vars, [1.0] + [1.0 - 0.81] * 4, rtol=1e-12)
    assert dec.tau2 == pytest.approx(0.81, rel=1e-12)


def test_decomposition_reconstructs_permuted_matrix(rng):
    c = _random_spd(rng, 6)
    order = random_ordering(6, rng)
    dec = decompose(c, order)
    idx = np.asarray(order)
    permuted = c.entries[np.ix_(idx, idx)]
    np.testing.assert_allclose(dec.lower_factor @ dec.lower_factor.T, permuted, rtol=0, atol=1e-12 * np.abs(permuted).max())
    np.testing.assert_allclose(dec.residual_vars + dec.condmean_vars, np.diag(permuted), rtol=1e-12)
    assert dec.condmean_vars[0] == 0.0


def test_residuals_match_normal_equations():
    """sigma_i^2 = C_ii - c_i' C_<i^-1 c_i for the regression of X_i on its predecessors."""
    rng = np.random.default_rng(2024)
    for trial in range(40):
        dim = int(rng.integers(2, 9))
        c = _random_spd(rng, dim)
        order = random_ordering(dim, rng)
        dec = decompose(c, order)
        idx = np.asarray(order)
        p = c.entries[np.ix_(idx, idx)]
        expected = [p[0, 0]]
        for i in range(1, dim):
            beta = np.linalg.solve(p[:i, :i], p[:i, i])
            expected.append(p[i, i] - p[:i, i] @ beta)
        np.testing.assert_allclose(dec.residual_vars, expected, rtol=0, atol=1e-8 * p.max(), err_msg=f"trial {trial}")


def test_decomposition_failure_names_pivot_and_variable():
    singular = CovarianceMatrix(entries=np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(DecompositionError) as err:
        decompose(singular, (1, 0))
    assert err.value.pivot == 2
    assert err.value.variable == 0


def test_bad_ordering():
    with pytest.raises(DomainError):
        decompose(identity(3), (0, 0, 1))


def test_random_ordering_is_permutation(rng):
    order = random_ordering(10, rng)
    assert sorted(order) == list(range(10))


# -----------------------------
# Spectral bounds
# -----------------------------
def test_eigen_bounds_sandwich_sequential_terms():
    """lambda_min <= sigma_i^2 and tau_i^2 <= lambda_max for every ordering."""
    rng = np.random.default_rng(77)
    for _ in range(200):
        dim = int(rng.integers(1, 13))
        c = _random_spd(rng, dim)
        lmin, lmax = eigen_bounds(c)
        for _ in range(5):
            dec = decompose(c, random_ordering(dim, rng))
            assert dec.sigma2 >= lmin * (1.0 - 1e-10)
            assert dec.tau2 <= lmax * (1.0 + 1e-10)


def test_eigen_substitution_equicorrelated():
    sigma, tau = eigen_substitution(equicorrelated(10, 0.5))
    assert sigma == pytest.approx(np.sqrt(0.5))
    assert tau == pytest.approx(np.sqrt(1.0 + 9 * 0.5))


def test_precision_residuals_bound_sequential_terms(rng):
    c = _random_spd(rng, 5)
    lmin, _ = eigen_bounds(c)
    prec = precision_residuals(c)
    assert np.all(prec >= lmin * (1.0 - 1e-12))
    for last in range(5):
        order = [i for i in range(5) if i != last] + [last]
        dec = decompose(c, order)
        assert dec.residual_vars[-1] == pytest.approx(prec[last], rel=1e-10)
        pos = {v: p for p, v in enumerate(order)}
        for v in range(5):
            assert prec[v] <= dec.residual_vars[pos[v]] * (1.0 + 1e-10)


# -----------------------------
# File input
# -----------------------------
def test_load_covariance_round_trip(tmp_path):
    path = tmp_path / "cov.txt"
    path.write_text("1.0 0.5\n0.5 2.0\n")
    c = load_covariance(path)
    np.testing.assert_allclose(c.entries, [[1.0, 0.5], [0.5, 2.0]])


def test_load_covariance_single_value(tmp_path):
    path = tmp_path / "one.txt"
    path.write_text("4.0\n")
    assert load_covariance(path).dim == 1


@pytest.mark.parametrize("text", ["1.0 0.5\n0.5\n", "1.0 x\nx 1.0\n", "1.0 0.4\n0.5 1.0\n"])
def test_load_covariance_rejects_bad_files(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(MatrixError):
        load_covariance(path)
