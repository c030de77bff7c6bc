import json

import numpy as np
import pytest

from smoothing.cutoff import CutoffChi
from smoothing.estimates import (
    check_grid_leaf_exactness,
    check_h_monotone,
    check_h_sup_error,
    check_plateau,
    check_surface_consistency,
)
from smoothing.transversal import (
    TransversalSmoother,
    TransversalSmoother2D,
    build_h_delta,
    build_h_delta_surface,
    eval_h_leafwise_deriv,
    parameter_span,
)
from util.errors import DomainError


@pytest.fixture
def chi():
    return CutoffChi("cubic")


@pytest.mark.parametrize(
    "y, expected",
    [
        (0.31, 0.3),  # lower plateau
        (0.35, 0.35),  # midpoint of the cell
        (0.38, 0.4),  # upper plateau
        (0.4, 0.4),  # on a grid leaf
    ],
)
def test_flat_staircase(catalog, chi, y, expected):
    h = build_h_delta(catalog.get_by_name("flat").family, 0.1, chi)
    assert float(h(0.0, y)) == pytest.approx(expected, abs=1e-12)


def test_tilted_surface_plateau(catalog, chi):
    h = build_h_delta_surface(catalog.get_by_name("tilted-surface").family, 0.1, chi)
    # z - x - y = 0.31 lies on the leaf a = 0.31
    assert float(h(0.2, 0.1, 0.61)) == pytest.approx(0.3, abs=1e-12)


def test_grid_leaves_are_exact_on_canonical(catalog, chi):
    entry = catalog.get_by_name("canonical-osgood")
    span = parameter_span(entry.family, entry.K.grid(16))
    h = TransversalSmoother(entry.family, 0.05, chi, span)
    # Grid leaves inside the parameter range [0, 1]
    j = np.arange(0, 21)
    x = np.full(j.shape, 0.5)
    values = h(x, h.grid_leaf(j, x))
    np.testing.assert_allclose(values, h.grid_value(j), atol=1e-12)


@pytest.mark.parametrize("name", ["flat", "affine", "canonical-osgood"])
def test_smoothing_reports_pass(catalog, chi, rng, name):
    entry = catalog.get_by_name(name)
    span = parameter_span(entry.family, entry.K.grid(16))
    h = TransversalSmoother(entry.family, 0.1, chi, span)
    assert check_grid_leaf_exactness(h, entry.K, rng, samples=200).passed
    assert check_plateau(h, entry.K, rng, samples=200).passed
    assert check_h_monotone(h, entry.K, n=16).passed
    assert check_h_sup_error(h, entry.K, n=32).passed


def test_surface_sup_error(catalog, chi):
    entry = catalog.get_by_name("tilted-surface")
    h = TransversalSmoother(entry.family, 0.1, chi, parameter_span(entry.family, entry.K.grid(8)))
    report = check_h_sup_error(h, entry.K, n=8)
    assert report.suite == "surface"
    assert report.passed


def test_surface_extends_planar_smoother(catalog, chi):
    surface = catalog.get_by_name("canonical-surface")
    planar = catalog.get_by_name(surface.planar)
    span = parameter_span(surface.family, surface.K.grid(8))
    report = check_surface_consistency(
        TransversalSmoother(surface.family, 0.05, chi, span),
        TransversalSmoother(planar.family, 0.05, chi, span),
        surface.K,
        n=8,
    )
    assert report.passed


def test_leafwise_derivative_vanishes_on_flat_leaves(catalog, chi):
    h = build_h_delta(catalog.get_by_name("flat").family, 0.1, chi)
    derivative = eval_h_leafwise_deriv(h, np.array([0.31, 0.35]), np.array([0.0, 0.5]))
    np.testing.assert_allclose(derivative, 0.0, atol=1e-9)


def test_delta_must_be_positive(catalog, chi):
    with pytest.raises(DomainError):
        TransversalSmoother(catalog.get_by_name("flat").family, 0.0, chi)


def test_planar_smoother_rejects_surfaces(catalog, chi):
    with pytest.raises(ValueError):
        TransversalSmoother2D(catalog.get_by_name("flat-surface").family, 0.1, chi)


def test_smoother_description_is_logged_as_structured_fields(catalog, chi):
    h = build_h_delta(catalog.get_by_name("flat").family, 0.1, chi)
    described = h.to_dict()
    assert described["family"] == "flat"
    assert described["chi"] == {"variant": "cubic", "C_chi": 3.0}
    lo, hi = described["j_range"]
    assert lo < hi
    json.dumps(described)
