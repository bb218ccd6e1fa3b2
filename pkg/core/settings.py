# core/settings.py
# ------------------------------------------------------------
# Tolerances, size caps and harness defaults.
#
# Every operation that needs a tolerance takes ``settings=`` and falls back
# to DEFAULT_SETTINGS. There are no environment variables or config files;
# the CLI builds a Settings from its flags.
#
from __future__ import annotations

from dataclasses import dataclass, replace as _replace


@dataclass(frozen=True)
class Settings:
    """
    Numerical tolerances and defaults.

    Attributes
    ----------
    grid_step              : abscissa step for the inversion/Mills sweeps.
    grid_rel_tol           : relative tolerance for the sweep inequalities.
    symmetry_rel_tol       : |C - C'| allowed, relative to max |C|.
    pd_rel_tol             : pivots must exceed dim * pd_rel_tol * max diagonal;
                             eigenvalues must exceed dim * pd_rel_tol * lambda_max.
    reconstruction_rel_tol : ||P C P' - L L'||_max allowed, relative to max |C|.
    default_tail_tol       : discarded Wold variance allowed when truncating psi.
    max_window_span        : cap on n * k for process windows.
    max_window_dim         : cap on the dimension of a window covariance.
    confidence             : two-sided level of the Wilson intervals.
    min_certification_reps : replications required for a certification run.
    chunk_size             : replications per Monte Carlo work unit.
    sandwich_tol           : absolute slack allowed in the coupling sandwich.
    ks_level               : significance level of the Gumbel KS check.
    """
    grid_step: float = 0.01
    grid_rel_tol: float = 1e-9
    symmetry_rel_tol: float = 1e-12
    pd_rel_tol: float = 1e-12
    reconstruction_rel_tol: float = 1e-10
    default_tail_tol: float = 1e-10
    max_window_span: int = 1_000_000
    max_window_dim: int = 4000
    confidence: float = 0.95
    min_certification_reps: int = 100
    chunk_size: int = 2048
    sandwich_tol: float = 1e-12
    ks_level: float = 0.01

    def replace(self, **changes) -> "Settings":
        """Return a copy with the given fields changed."""
        return _replace(self, **changes)


DEFAULT_SETTINGS = Settings()


__all__ = ["Settings", "DEFAULT_SETTINGS"]
