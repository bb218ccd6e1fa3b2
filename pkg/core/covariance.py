# core/covariance.py
# ------------------------------------------------------------
# Covariance matrices and their sequential conditional decomposition.
#
# For an ordering of the variables, write X_i = E_i + R_i with E_i the
# conditional mean of X_i given its predecessors. With the triangular
# factor P C P' = L L':
#
#     sigma_i^2 = Var R_i = L_ii^2
#     tau_i^2   = Var E_i = C_ii - L_ii^2
#
# The certificate uses sigma^2 = min sigma_i^2 and tau^2 = max tau_i^2.
# Rayleigh-quotient bounds license replacing them by lambda_min(C) and
# lambda_max(C) (eigenvalue substitution).
#
# Input format (shared with the CLI)
# ----------------------------------
# Text file, one row per line, whitespace-separated decimals. The
# dimension is inferred and symmetry is validated.
#
from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .errors import DecompositionError, DomainError, MatrixError, NumericError
from .models import ConditionalDecomposition, CovarianceMatrix
from .settings import DEFAULT_SETTINGS, Settings

logger = logging.getLogger(__name__)

Ordering = Optional[Sequence[int]]


# -----------------------------
# Construction & validation
# -----------------------------
def as_covariance(
    entries: Union[np.ndarray, Sequence[Sequence[float]]],
    *,
    settings: Settings = DEFAULT_SETTINGS,
) -> CovarianceMatrix:
    """
    Validate and freeze a covariance matrix.

    Checks: square, finite, symmetric to settings.symmetry_rel_tol relative to
    max |C|, and positive definite with
    lambda_min > dim * settings.pd_rel_tol * lambda_max. Singular or
    indefinite input is rejected, never jittered.

    Raises
    ------
    MatrixError
    """
    a = np.array(entries, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise MatrixError(f"covariance must be a non-empty square matrix (got shape {a.shape}).")
    if not np.all(np.isfinite(a)):
        raise MatrixError("covariance entries must be finite.")

    scale = float(np.max(np.abs(a)))
    asym = float(np.max(np.abs(a - a.T)))
    if asym > settings.symmetry_rel_tol * scale:
        raise MatrixError(f"covariance is not symmetric (max |C - C'| = {asym:.3e}).")
    a = 0.5 * (a + a.T)

    try:
        eig = scipy.linalg.eigvalsh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigenvalue computation failed: {exc}") from exc
    dim = a.shape[0]
    if eig[0] <= dim * settings.pd_rel_tol * eig[-1]:
        raise MatrixError(
            f"covariance is not positive definite (lambda_min = {eig[0]:.3e}, lambda_max = {eig[-1]:.3e})."
        )
    a.setflags(write=False)
    return CovarianceMatrix(entries=a)


def identity(dim: int) -> CovarianceMatrix:
    """Independent unit-variance variables."""
    return as_covariance(np.eye(dim))


def equicorrelated(dim: int, rho: float) -> CovarianceMatrix:
    """Unit variances, every pair correlated rho."""
    a = np.full((dim, dim), float(rho))
    np.fill_diagonal(a, 1.0)
    return as_covariance(a)


def toeplitz(first_row: Sequence[float]) -> CovarianceMatrix:
    """Symmetric Toeplitz matrix from its first row (autocovariances)."""
    return as_covariance(scipy.linalg.toeplitz(np.asarray(first_row, dtype=float)))


def ar1_toeplitz(dim: int, rho: float) -> CovarianceMatrix:
    """Covariance of dim consecutive values of a unit-variance AR(1): rho^|i-j|."""
    if not -1.0 < rho < 1.0:
        raise DomainError("AR(1) needs |rho| < 1.")
    return toeplitz(float(rho) ** np.arange(dim))


def load_covariance(path: Union[str, Path], *, settings: Settings = DEFAULT_SETTINGS) -> CovarianceMatrix:
    """
    Read a whitespace-separated matrix file (one row per line).

    Raises
    ------
    MatrixError
        On ragged rows, non-numeric tokens, asymmetry or non-PD content.
    """
    try:
        a = np.loadtxt(path, dtype=float, ndmin=2)
    except ValueError as exc:
        raise MatrixError(f"cannot parse covariance file {path}: {exc}") from exc
    logger.info("loaded %dx%d covariance from %s", a.shape[0], a.shape[1], path)
    return as_covariance(a, settings=settings)


def _check_ordering(ordering: Ordering, dim: int) -> Tuple[int, ...]:
    if ordering is None:
        return tuple(range(dim))
    order = tuple(int(i) for i in ordering)
    if sorted(order) != list(range(dim)):
        raise DomainError(f"ordering must be a permutation of 0..{dim - 1}.")
    return order


def random_ordering(dim: int, rng: np.random.Generator) -> Tuple[int, ...]:
    """A uniformly random permutation of 0..dim-1."""
    return tuple(int(i) for i in rng.permutation(dim))


# -----------------------------
# Sequential decomposition
# -----------------------------
def decompose(
    c: CovarianceMatrix,
    ordering: Ordering = None,
    *,
    settings: Settings = DEFAULT_SETTINGS,
) -> ConditionalDecomposition:
    """
    Triangular factorization of the permuted matrix and the per-position
    residual / conditional-mean variances.

    Parameters
    ----------
    c        : covariance matrix
    ordering : permutation of 0..dim-1 (natural order if None)

    Returns
    -------
    ConditionalDecomposition with sigma_i^2 + tau_i^2 = C_ii per position.

    Raises
    ------
    DecompositionError
        A pivot fails (LAPACK) or falls below dim * pd_rel_tol * max diagonal;
        the error names the pivot position and the original variable.
    NumericError
        Reconstruction error above settings.reconstruction_rel_tol.
    """
    order = _check_ordering(ordering, c.dim)
    idx = np.asarray(order)
    permuted = np.ascontiguousarray(c.entries[np.ix_(idx, idx)])

    factor, info = lapack.dpotrf(permuted, lower=1, clean=1)
    if info > 0:
        raise DecompositionError(
            f"matrix is not positive definite at pivot {info} (variable {order[info - 1]}).",
            pivot=int(info),
            variable=order[info - 1],
        )
    if info < 0:
        raise NumericError(f"dpotrf rejected argument {-info}.")
    lower = np.tril(factor)

    residual = np.diag(lower) ** 2
    floor = c.dim * settings.pd_rel_tol * float(np.max(np.diag(permuted)))
    bad = np.flatnonzero(residual <= floor)
    if bad.size:
        pos = int(bad[0])
        raise DecompositionError(
            f"pivot {pos + 1} (variable {order[pos]}) is below the relative tolerance.",
            pivot=pos + 1,
            variable=order[pos],
        )

    scale = float(np.max(np.abs(permuted)))
    err = float(np.max(np.abs(permuted - lower @ lower.T)))
    if err > settings.reconstruction_rel_tol * scale:
        raise NumericError(f"triangular factor reconstruction error {err:.3e} too large.")

    condmean = np.maximum(np.diag(permuted) - residual, 0.0)
    condmean[0] = 0.0  # the first variable has no predecessors

    for arr in (residual, condmean, lower):
        arr.setflags(write=False)
    logger.debug("decomposed dim=%d: sigma2=%.6g tau2=%.6g", c.dim, residual.min(), condmean.max())
    return ConditionalDecomposition(
        ordering=order,
        residual_vars=residual,
        condmean_vars=condmean,
        lower_factor=lower,
    )


def sigma_tau(
    c: CovarianceMatrix,
    ordering: Ordering = None,
    *,
    settings: Settings = DEFAULT_SETTINGS,
) -> Tuple[float, float]:
    """(sqrt(min sigma_i^2), sqrt(max tau_i^2)) in standard-deviation units."""
    dec = decompose(c, ordering, settings=settings)
    return float(np.sqrt(dec.sigma2)), float(np.sqrt(dec.tau2))


# -----------------------------
# Spectral quantities
# -----------------------------
def eigen_bounds(c: CovarianceMatrix) -> Tuple[float, float]:
    """
    (lambda_min, lambda_max) from a full symmetric eigen-decomposition.

    Raises
    ------
    NumericError
        If LAPACK fails to converge.
    """
    try:
        eig = scipy.linalg.eigvalsh(c.entries)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigenvalue computation did not converge: {exc}") from exc
    return float(eig[0]), float(eig[-1])


def eigen_substitution(c: CovarianceMatrix) -> Tuple[float, float]:
    """(sqrt(lambda_min), sqrt(lambda_max)), valid replacements for (sigma, tau)."""
    lmin, lmax = eigen_bounds(c)
    return float(np.sqrt(lmin)), float(np.sqrt(lmax))


def precision_residuals(c: CovarianceMatrix) -> np.ndarray:
    """
    1 / (C^-1)_ii: residual variance of X_i given ALL other variables.
    Each entry is >= lambda_min and <= the sequential sigma_i^2 of any ordering.
    """
    try:
        chol = scipy.linalg.cho_factor(c.entries, lower=True)
        inv = scipy.linalg.cho_solve(chol, np.eye(c.dim))
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"inversion failed: {exc}") from exc
    return 1.0 / np.diag(inv)


__all__ = [
    "as_covariance",
    "identity",
    "equicorrelated",
    "toeplitz",
    "ar1_toeplitz",
    "load_covariance",
    "random_ordering",
    "decompose",
    "sigma_tau",
    "eigen_bounds",
    "eigen_substitution",
    "precision_residuals",
]
