# tests/test_certify.py
# ------------------------------------------------------------
# Orderings, covariance certificates and the certification suite.
#
from __future__ import annotations

import numpy as np
import pytest

from core.certify import (
    best_ordering,
    certificate_for_covariance,
    eigen_certificate,
    parse_ordering,
    resolve_target,
    run_certification_suite,
    suite_targets,
)
from core.covariance import as_covariance, equicorrelated, identity
from core.errors import DomainError, GateError
from core.models import ProcessWindow
from core.process import ar1_model


@pytest.mark.parametrize("text, expected", [("natural", None), ("best-of:5", 5), (" Best-Of:12 ", 12)])
def test_parse_ordering(text, expected):
    assert parse_ordering(text) == expected


@pytest.mark.parametrize("text", ["random", "best-of:0", "best-of:x", "best-of"])
def test_parse_ordering_rejects(text):
    with pytest.raises(DomainError):
        parse_ordering(text)


def test_resolve_process_window():
    c = resolve_target(ProcessWindow(model=ar1_model(0.5), n=4))
    assert c.entries[0, 1] == pytest.approx(0.5)
    assert resolve_target(identity(3)).dim == 3
    with pytest.raises(DomainError):
        resolve_target("identity")


def test_equicorrelated_certificate_uses_sequential_terms():
    cert = certificate_for_covariance(equicorrelated(100, 0.5), 0.25)
    assert cert.sigma ** 2 == pytest.approx(0.505, rel=1e-12)
    assert cert.tau ** 2 == pytest.approx(0.495, rel=1e-12)
    assert cert.source == "sequential, natural order"


def test_sequential_beats_eigenvalues_for_equicorrelation():
    c = equicorrelated(100, 0.5)
    assert certificate_for_covariance(c, 0.25).threshold > eigen_certificate(c, 0.25).threshold


def test_best_ordering_never_worse_than_natural(rng):
    a = rng.standard_normal((80, 80))
    c = as_covariance(a @ a.T / 80.0 + np.eye(80))
    natural = certificate_for_covariance(c, 0.25)
    order, cert = best_ordering(c, 0.25, 5, seed=3)
    assert sorted(order) == list(range(80))
    assert cert.threshold >= natural.threshold
    again = certificate_for_covariance(c, 0.25, best_of=5, seed=3)
    assert again.threshold == cert.threshold
    assert "seed 3" in again.source


def test_certificate_gate_for_small_matrices():
    with pytest.raises(GateError):
        certificate_for_covariance(identity(10), 0.25)


def test_suite_targets():
    names = [name for name, _ in suite_targets()]
    assert names == ["iid-n100", "equicorrelated-rho0.5-n100", "ar1-rho0.9-n200"]


def test_suite_reports_and_determinism():
    a = run_certification_suite(5, 400)
    b = run_certification_suite(5, 400, workers=3)
    assert [r.name for r in a] == [
        "iid-n100/lower-bound",
        "iid-n100/upper-bound",
        "equicorrelated-rho0.5-n100/lower-bound",
        "equicorrelated-rho0.5-n100/upper-bound",
        "ar1-rho0.9-n200/lower-bound",
        "ar1-rho0.9-n200/upper-bound",
        "iid-n100/gumbel-coupling",
        "equicorrelated-rho0.5-n10/hi-inequality",
    ]
    for ra, rb in zip(a, b):
        assert ra.details == rb.details
        assert [c.estimate for c in ra.checks] == [c.estimate for c in rb.checks]
