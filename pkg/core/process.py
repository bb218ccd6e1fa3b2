# core/process.py
# ------------------------------------------------------------
# Stationary Gaussian processes in (truncated) Wold form.
#
#     X_i = sd * (Z_i + sum_{j=1..K} psi_j Z_{i-j}),   Z_i i.i.d. N(0, 1)
#
# Models are normalised to unit process variance. The variance discarded
# by truncating psi after K terms is recorded as ``truncation_tail`` and is
# treated as independent white noise at lag 0, so a window covariance has
# an exact unit diagonal and stays positive definite.
#
# Subsampling with stride k keeps Y_i = X_{ik}. The residual variance used
# for Y is sd^2 (1 + psi_1^2 + .. + psi_{k-1}^2) = 1 - sd^2 sum_{j>=k} psi_j^2,
# which rises towards 1 with k. The true innovations of Y (conditioning on
# Y's own past only) have variance at least this large, so using it as
# sigma^2 keeps the certificate valid.
#
# Process spec file (shared with the CLI), key=value lines:
#     kind = ar1 | psi-list
#     rho = 0.9                  (ar1)
#     psi = 0.5, 0.25, 0.125     (psi-list; commas or spaces)
#     tail_tol = 1e-10
#     truncation_tail = 0        (psi-list, optional)
#
from __future__ import annotations

import logging
import re
from math import ceil, log, sqrt
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import signal

from .bounds import lower_bound_certificate, smallest_valid_n
from .covariance import toeplitz
from .errors import DomainError, GateError, ResourceError
from .models import CovarianceMatrix, LowerBoundCertificate, ProcessKind, WoldModel
from .settings import DEFAULT_SETTINGS, Settings

logger = logging.getLogger(__name__)

_DIRECT_CORRELATION_WORK = 10_000_000


# -----------------------------
# Model construction
# -----------------------------
def ar1_model(
    rho: float,
    tail_tol: Optional[float] = None,
    *,
    settings: Settings = DEFAULT_SETTINGS,
) -> WoldModel:
    """
    Unit-variance AR(1): psi_j = rho^j, sd = sqrt(1 - rho^2), truncated at the
    smallest K whose discarded variance rho^(2(K+1)) is <= tail_tol.

    Raises
    ------
    DomainError
        |rho| >= 1 (not a purely non-deterministic unit-variance process) or
        tail_tol <= 0.
    """
    rho = float(rho)
    tol = settings.default_tail_tol if tail_tol is None else float(tail_tol)
    if not -1.0 < rho < 1.0:
        raise DomainError("ar1_model requires |rho| < 1.")
    if not tol > 0.0:
        raise DomainError("tail_tol must be > 0.")

    sd = sqrt(1.0 - rho * rho)
    if rho == 0.0:
        return WoldModel(innovation_sd=1.0, psi=(), truncation_tail=0.0, tail_tol=tol, kind=ProcessKind.AR1)

    r2 = rho * rho
    k = max(0, int(ceil(log(tol) / log(r2))) - 1)
    while r2 ** (k + 1) > tol:
        k += 1
    while k > 0 and r2 ** k <= tol:
        k -= 1
    psi = tuple(float(rho ** j) for j in range(1, k + 1))
    tail = r2 ** (k + 1)
    logger.debug("ar1_model rho=%g: K=%d, discarded variance %.3e", rho, k, tail)
    return WoldModel(innovation_sd=sd, psi=psi, truncation_tail=tail, tail_tol=tol, kind=ProcessKind.AR1)


def psi_model(
    psi: Sequence[float],
    truncation_tail: float = 0.0,
    tail_tol: Optional[float] = None,
    *,
    settings: Settings = DEFAULT_SETTINGS,
) -> WoldModel:
    """
    Model from a user-supplied psi_1..psi_K, scaled to unit process variance:
    sd^2 = (1 - truncation_tail) / (1 + sum psi_j^2).
    """
    tol = settings.default_tail_tol if tail_tol is None else float(tail_tol)
    coeffs = tuple(float(p) for p in psi)
    if not all(np.isfinite(coeffs)):
        raise DomainError("psi coefficients must be finite.")
    if not 0.0 <= truncation_tail <= tol:
        raise DomainError(f"truncation_tail must lie in [0, tail_tol={tol:g}].")
    var = (1.0 - truncation_tail) / (1.0 + sum(p * p for p in coeffs))
    return WoldModel(
        innovation_sd=sqrt(var),
        psi=coeffs,
        truncation_tail=float(truncation_tail),
        tail_tol=tol,
        kind=ProcessKind.PSI_LIST,
    )


def load_process_spec(path: Union[str, Path], *, settings: Settings = DEFAULT_SETTINGS) -> WoldModel:
    """
    Parse a key=value process spec (see module header).

    Raises
    ------
    DomainError
        Unknown kind, missing or malformed keys.
    """
    fields: Dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"process spec line is not key=value: {raw!r}")
        key, value = line.split("=", 1)
        fields[key.strip().lower().replace("-", "_")] = value.strip()

    kind = fields.get("kind", "").lower()
    try:
        tol = float(fields["tail_tol"]) if "tail_tol" in fields else None
        if kind == ProcessKind.AR1.value:
            if "rho" not in fields:
                raise DomainError("ar1 process spec needs rho.")
            return ar1_model(float(fields["rho"]), tol, settings=settings)
        if kind in (ProcessKind.PSI_LIST.value, "psi_list", "psi"):
            tokens = [t for t in re.split(r"[,\s]+", fields.get("psi", "")) if t]
            return psi_model(
                [float(t) for t in tokens],
                float(fields.get("truncation_tail", 0.0)),
                tol,
                settings=settings,
            )
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"malformed process spec {path}: {exc}") from exc
    raise DomainError(f"Unknown process kind '{kind}'. Expected ar1 | psi-list.")


# -----------------------------
# Second-order structure
# -----------------------------
def autocovariances(m: WoldModel, max_lag: int) -> np.ndarray:
    """
    gamma(0..max_lag) with gamma(h) = sd^2 sum_j psi_j psi_{j+h} for h >= 1
    and gamma(0) = 1 (truncation tail counted as white noise).

    Only lags up to min(max_lag, K) are summed: lag by lag while that work
    stays small, otherwise by one FFT correlation.
    """
    coeffs = m.ma_coefficients()
    size = coeffs.size
    upto = min(int(max_lag), size - 1)
    if (upto + 1) * size <= _DIRECT_CORRELATION_WORK:
        head = np.array([np.dot(coeffs[: size - h], coeffs[h:]) for h in range(upto + 1)])
    else:
        head = signal.fftconvolve(coeffs, coeffs[::-1], mode="full")[size - 1 : size + upto]
    out = np.zeros(max_lag + 1)
    out[: upto + 1] = head * m.innovation_var
    out[0] = 1.0
    return out


def autocovariance(m: WoldModel, h: int) -> float:
    """gamma(h) for a single lag h >= 0."""
    if h < 0:
        raise DomainError("lag must be >= 0.")
    return float(autocovariances(m, h)[h])


def subsample_residual_variance(m: WoldModel, k: int) -> float:
    """
    sd^2 (1 + psi_1^2 + .. + psi_{k-1}^2); nondecreasing in k, tends to
    1 - truncation_tail.
    """
    if int(k) != k or k < 1:
        raise DomainError("stride k must be a positive integer.")
    head = np.asarray(m.psi[: int(k) - 1], dtype=float)
    return float(m.innovation_var * (1.0 + np.sum(head * head)))


def window_covariance(
    m: WoldModel,
    n: int,
    k: int = 1,
    *,
    settings: Settings = DEFAULT_SETTINGS,
) -> CovarianceMatrix:
    """
    Toeplitz covariance of (X_k, X_2k, .., X_nk): entry (i, j) = gamma(|i-j| k).

    Raises
    ------
    ResourceError
        n * k above settings.max_window_span or n above settings.max_window_dim.
    """
    if int(n) != n or n < 1 or int(k) != k or k < 1:
        raise DomainError("n and k must be positive integers.")
    if n * k > settings.max_window_span or n > settings.max_window_dim:
        raise ResourceError(
            f"window n={n}, k={k} exceeds the size cap "
            f"(n*k <= {settings.max_window_span}, n <= {settings.max_window_dim})."
        )
    acov = autocovariances(m, (n - 1) * k)
    return toeplitz(acov[:: k][:n])


# -----------------------------
# Certificates for the process maximum
# -----------------------------
def stationary_lower_bound(m: WoldModel, n: int, k: int, alpha: float) -> LowerBoundCertificate:
    """
    Certificate for M_n = max(X_1..X_n) from the floor(n/k) subsampled values:
    sigma^2 = subsample_residual_variance(m, k), tau^2 = 1 - sigma^2.

    Raises
    ------
    GateError
        N + L_alpha < 6 for the subsampled count; the message reports the
        largest usable k.
    """
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer.")
    sigma2 = subsample_residual_variance(m, k)
    tau2 = max(0.0, 1.0 - sigma2)
    count = int(n) // int(k)
    n_min = smallest_valid_n(alpha) if 0.0 < alpha < 0.5 else None
    if n_min is not None and count < n_min:
        largest_k = int(n) // n_min
        hint = f"largest usable k is {largest_k}" if largest_k >= 1 else f"n must be at least {n_min}"
        raise GateError(
            f"requires N + L_alpha >= 6 for the {count} subsampled variables "
            f"(smallest valid count at alpha={alpha:g} is {n_min}); {hint}",
            smallest_n=n_min,
            largest_k=largest_k,
        )
    return lower_bound_certificate(
        count, alpha, sqrt(sigma2), sqrt(tau2), source=f"stationary stride k={int(k)} of n={int(n)}"
    )


def stride_sweep(
    m: WoldModel,
    n: int,
    alpha: float,
    ks: Sequence[int],
) -> List[Tuple[int, Optional[LowerBoundCertificate]]]:
    """Certificates across strides; None where the gate fails."""
    out: List[Tuple[int, Optional[LowerBoundCertificate]]] = []
    for k in ks:
        try:
            out.append((int(k), stationary_lower_bound(m, n, int(k), alpha)))
        except GateError:
            out.append((int(k), None))
    return out


def best_stride(
    m: WoldModel,
    n: int,
    alpha: float,
    ks: Sequence[int],
) -> Tuple[int, LowerBoundCertificate]:
    """The stride with the largest certified threshold."""
    usable = [(k, cert) for k, cert in stride_sweep(m, n, alpha, ks) if cert is not None]
    if not usable:
        raise GateError(f"no stride in the sweep passes N + L_alpha >= 6 at n={n}.")
    return max(usable, key=lambda kc: kc[1].threshold)


__all__ = [
    "ar1_model",
    "psi_model",
    "load_process_spec",
    "autocovariances",
    "autocovariance",
    "subsample_residual_variance",
    "window_covariance",
    "stationary_lower_bound",
    "stride_sweep",
    "best_stride",
]
