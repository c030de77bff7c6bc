import numpy as np
import pytest

from lamination.family import LeafFamily2D, leaf_eval
from lamination.domain import Domain
from lamination.log_lipschitz import (
    check_lemma1,
    check_monotone_ordering,
    check_projection_roundtrip,
    estimate_log_lipschitz_L,
    check_basic_assumption,
)
from lamination.partial_function import check_leafwise_derivative, named_function
from lamination.projection import bisect_param, project_pi
from lamination.slope_field import check_slope_consistency
from util.errors import CoverageError, DomainError, NumericError


def test_canonical_leaf_passes_through_known_point(catalog):
    family = catalog.get_by_name("canonical-osgood").family
    # f_a(x) = a^(e^-x): the leaf through (log 2, 1/2) is a = 1/4
    assert family.evaluate(0.25, np.log(2.0)) == pytest.approx(0.5)
    assert leaf_eval(family, 0.25, np.log(2.0)) == pytest.approx(0.5)
    assert project_pi(family, np.log(2.0), 0.5) == pytest.approx(0.25)


def test_leaf_eval_on_space_curves(catalog):
    family = catalog.get_by_name("flat-3d").family
    np.testing.assert_allclose(np.ravel(leaf_eval(family, (0.3, 0.7), 0.1)), [0.3, 0.7])


def test_bisection_agrees_with_inverse(catalog):
    entry = catalog.get_by_name("canonical-osgood")
    x, y = entry.K.grid(12)
    exact = project_pi(entry.family, x, y)
    bisected = project_pi(entry.family, x, y, method="bisection")
    np.testing.assert_allclose(bisected, exact, atol=1e-8)


def test_bisection_without_inverse():
    domain = Domain([(-1.0, 1.0), (-1.0, 3.0)])
    family = LeafFamily2D("shifted", domain, (0.0, 1.0), lambda a, x: a + x**2, lambda a, x: 2 * x)
    a = bisect_param(family, np.array([0.5, -0.5]), np.array([0.75, 0.5]))
    np.testing.assert_allclose(a, [0.5, 0.25], atol=1e-9)


def test_bisection_without_iterations(catalog):
    family = catalog.get_by_name("flat").family
    with pytest.raises(NumericError):
        bisect_param(family, 0.0, 0.5, max_iter=0)
    a = bisect_param(family, 0.0, 5.0, max_iter=0, on_uncovered="nan")
    assert np.isnan(a)


def test_uncovered_point(catalog):
    family = catalog.get_by_name("flat").family
    with pytest.raises(CoverageError):
        project_pi(family, 0.0, 5.0)
    a = project_pi(family, np.array([0.0, 0.0]), np.array([0.5, 5.0]), on_uncovered="nan")
    assert a[0] == pytest.approx(0.5)
    assert np.isnan(a[1])


def test_unknown_projection_method(catalog):
    with pytest.raises(ValueError):
        project_pi(catalog.get_by_name("flat").family, 0.0, 0.5, method="newton")


def test_strict_evaluation_rejects_base_outside_domain(catalog):
    family = catalog.get_by_name("flat").family
    with pytest.raises(DomainError):
        family.evaluate(0.5, 10.0)
    assert family.evaluate(0.5, 10.0, strict=False) == 0.5


def test_curve_projection_returns_pairs(catalog):
    family = catalog.get_by_name("drift-3d").family
    a = project_pi(family, np.array([0.25, -0.5]), np.array([0.5, 0.5]), np.array([0.3, 0.7]))
    assert a.shape == (2, 2)
    np.testing.assert_allclose(a, [[0.25, 0.3], [1.0, 0.7]])


def test_lemma1_envelope_on_canonical(catalog, rng):
    entry = catalog.get_by_name("canonical-osgood")
    lower, upper = check_lemma1(entry.family, entry.L, rng, samples=2000)
    assert lower.check == "lemma1-lower"
    assert lower.passed
    assert upper.passed


@pytest.mark.parametrize("name", ["canonical-osgood", "perturbed-affine", "tilted-surface", "canonical-osgood-3d"])
def test_monotone_ordering(catalog, rng, name):
    report = check_monotone_ordering(catalog.get_by_name(name).family, rng, samples=200)
    assert report.strict
    assert report.passed


@pytest.mark.parametrize("name", ["affine", "canonical-osgood", "canonical-surface", "drift-3d"])
def test_projection_roundtrip(catalog, rng, name):
    assert check_projection_roundtrip(catalog.get_by_name(name).family, rng, samples=200).passed


def test_slope_consistency(catalog, rng):
    entry = catalog.get_by_name("canonical-osgood-3d")
    assert check_slope_consistency(entry.field, entry.family, rng, samples=200).passed


def test_constant_field_uses_floor_constant(catalog, rng):
    entry = catalog.get_by_name("affine")
    estimate = estimate_log_lipschitz_L(entry.field, entry.domain, rng, samples=500)
    assert estimate.L == 0.0
    assert estimate.L_effective == 1.45
    assert check_basic_assumption(entry.field, entry.domain, 1.45, rng, samples=500).passed
    with pytest.raises(ValueError):
        check_basic_assumption(entry.field, entry.domain, 0.0, rng)


def test_leafwise_derivative_of_base_coordinate(catalog, rng):
    family = catalog.get_by_name("canonical-osgood").family
    assert check_leafwise_derivative(named_function("x", family), family, rng, samples=100).passed


def test_unknown_test_function(catalog):
    with pytest.raises(ValueError):
        named_function("w", catalog.get_by_name("flat").family)
