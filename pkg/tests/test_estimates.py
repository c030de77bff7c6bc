import numpy as np
import pytest

from lamination.partial_function import named_function
from smoothing.composite import build_psi
from smoothing.cutoff import CutoffChi
from smoothing.estimates import (
    EXACTNESS_TOL,
    check_h_derivative,
    check_lemma2,
    check_prop2_bounds,
    convergence_report,
    h_derivative_bound,
    lemma2_bound,
    measure_h_errors,
    report_theorem1,
    report_theorem2,
)
from smoothing.transversal import TransversalSmoother, parameter_span
from util.errors import DomainError


def canonical_smoother(catalog, delta):
    entry = catalog.get_by_name("canonical-osgood")
    span = parameter_span(entry.family, entry.K.grid(16))
    return entry, TransversalSmoother(entry.family, delta, CutoffChi("cubic"), span)


def test_h_derivative_bound_at_origin():
    expected = 0.1 * 3.0 * (1.5 * np.log(4.0) + 3.0 * np.log(10.0))
    assert h_derivative_bound(0.1, 3.0, 1.5, 0.0) == pytest.approx(expected)
    assert lemma2_bound(0.1, 1.5, 0.0) == pytest.approx(expected / 0.3)


def test_h_derivative_on_canonical(catalog):
    entry, h = canonical_smoother(catalog, 0.05)
    report = check_h_derivative(h, entry.L, entry.K, n=24)
    assert report.role == "c1"
    assert report.series is not None
    assert report.passed


def test_lemma2_on_canonical(catalog):
    entry = catalog.get_by_name("canonical-osgood")
    report = check_lemma2(entry.family, 0.05, entry.L, entry.K, x_points=200)
    assert report.check == "lemma2"
    assert report.passed


def test_h_errors_shrink_with_delta(catalog):
    entry, coarse = canonical_smoother(catalog, 0.1)
    _, fine = canonical_smoother(catalog, 0.025)
    coarse_err, _ = measure_h_errors(coarse, entry.K, 24)
    fine_err, _ = measure_h_errors(fine, entry.K, 24)
    assert 0 < fine_err < coarse_err <= 0.1


def test_convergence_needs_strict_decrease():
    first = convergence_report("h-convergence", 0.2, None, "smooth2d", {"delta": 0.1})
    assert first.bound == np.inf
    assert first.passed
    assert convergence_report("h-convergence", 0.1, 0.2, "smooth2d", {}).passed
    assert not convergence_report("h-convergence", 0.2, 0.2, "smooth2d", {}).passed


def test_convergence_at_exactness_floor():
    report = convergence_report("h-convergence", 0.0, 0.0, "smooth2d", {})
    assert not report.strict
    assert report.slack == EXACTNESS_TOL
    assert report.passed
    assert "measured value is at the exactness floor" in report.notes


def test_composite_reproduces_base_coordinate_on_flat(catalog):
    entry = catalog.get_by_name("flat")
    reports = report_theorem1(
        named_function("x", entry.family), entry.family, entry.K, 0.05, 0.1, 8, CutoffChi("cubic"), n=16
    )
    assert [r.role for r in reports] == ["c0", "c1"]
    assert reports[0].measured < 1e-12
    assert all(r.passed for r in reports)


def test_composite_couples_delta_to_J(catalog):
    entry = catalog.get_by_name("flat")
    reports = report_theorem1(
        named_function("x", entry.family), entry.family, entry.K, 0.05, None, 8, CutoffChi("cubic"), n=16
    )
    assert reports[0].delta == pytest.approx(1 / 64)
    assert all(r.passed for r in reports)


def test_composite_needs_positive_J(catalog):
    entry, h = canonical_smoother(catalog, 0.1)
    with pytest.raises(DomainError):
        build_psi(named_function("pi", entry.family), entry.family, 0, h)


def surface_smoother(catalog, name, delta):
    entry = catalog.get_by_name(name)
    span = parameter_span(entry.family, entry.K.grid(8))
    return entry, TransversalSmoother(entry.family, delta, CutoffChi("cubic"), span)


def test_prop2_on_tilted_leaves(catalog):
    entry, h = surface_smoother(catalog, "tilted-surface", 0.1)
    reports = check_prop2_bounds(h, entry.L, entry.K, n=6)
    assert [r.role for r in reports] == ["c1x", "c1y"]
    for report in reports:
        assert report.suite == "surface"
        assert report.measured <= report.bound
        assert report.passed


def test_prop2_on_surfaces_constant_in_y(catalog):
    entry, h = surface_smoother(catalog, "canonical-surface", 0.05)
    c1x, c1y = check_prop2_bounds(h, entry.L, entry.K, n=6)
    assert c1x.passed
    assert c1x.params["L"] == pytest.approx(1.5 * entry.L)
    # leaves do not move with y, so h_delta has no y-derivative along them
    assert c1y.measured == pytest.approx(0.0, abs=1e-12)
    assert c1y.passed


def test_theorem2_reproduces_base_coordinate(catalog):
    entry = catalog.get_by_name("tilted-surface")
    reports = report_theorem2(
        named_function("x", entry.family), entry.family, entry.K, 0.05, 0.1, 8, CutoffChi("cubic"), n=6
    )
    assert [r.role for r in reports] == ["c0", "c1x", "c1y"]
    assert reports[0].measured < 1e-12
    assert all(r.measured <= r.bound for r in reports)
    assert all(r.passed for r in reports)
