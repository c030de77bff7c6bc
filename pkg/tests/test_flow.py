import numpy as np
import pytest

from flow.estimates import (
    check_corollary1,
    check_grad_pi_and_final,
    check_leaf_separation,
    check_lemma5,
    check_pi_delta_roundtrip,
    corollary1_window,
    final_bound,
    lemma5_bound,
)
from flow.mollifier import BumpKernel, BumpLambda, mollify_strand
from flow.projection import SmoothProjection, integrate_approx_leaf, project_pi_delta, select_radius
from flow.smoothed_field import build_F_delta, check_blend_weights, check_lemma3, proof_constant
from lamination.partial_function import coordinate_function
from smoothing.composite import build_psi_curve
from util.errors import DomainError

# Small quadrature and sample counts keep the constructions quick
SMALL = {"probes": 16, "quadrature": 8, "strand_samples": 201}


@pytest.fixture(scope="module")
def flat_field(catalog):
    entry = catalog.get_by_name("flat-3d")
    return entry, build_F_delta(entry.field, 0.1, entry.domain, 1.45, np.random.default_rng(1), **SMALL)


@pytest.fixture(scope="module")
def drift_field(catalog):
    entry = catalog.get_by_name("drift-3d")
    return entry, build_F_delta(entry.field, 0.1, entry.domain, 1.45, np.random.default_rng(1), **SMALL)


def test_bump_lambda_profile():
    bump = BumpLambda()
    assert bump(0.0) == 1.0
    assert bump(0.5 * np.pi) == pytest.approx(0.0, abs=1e-15)
    assert bump(2.0) == 0.0
    assert bump.derivative(0.25 * np.pi) == pytest.approx(-1.0)


def test_kernel_has_unit_mass():
    kernel = BumpKernel(16)
    assert kernel.weights.sum() == pytest.approx(1.0)
    assert np.all(np.abs(kernel.nodes) < 1.0)


def test_blend_weights_sum_to_one(rng):
    assert check_blend_weights(0.1, rng, samples=1000).passed


def test_proof_constant_grows_with_L():
    c_sup, c_jac = proof_constant(0.01, 1.5)
    assert c_sup > 0 and c_jac > 0
    assert proof_constant(0.01, 3.0)[0] > c_sup


def test_constant_strand_keeps_widest_kernel(catalog):
    entry = catalog.get_by_name("drift-3d")
    strand = mollify_strand(entry.field, 2, 3, 0.1, (-1.0, 1.0), BumpKernel(8), samples=101)
    assert strand.width == pytest.approx(0.5)
    np.testing.assert_allclose(strand(np.array([0.0, 0.5])), [[1.0, 0.0], [1.0, 0.0]], atol=1e-12)


def test_flat_field_stays_zero(flat_field):
    entry, sf = flat_field
    x, y1, y2 = entry.domain.grid(5)
    np.testing.assert_allclose(sf(x, y1, y2), 0.0, atol=1e-15)
    assert sf.C >= sf.C_proof
    assert sf.dominant == "proof"
    assert final_bound(sf) == pytest.approx(2.0 * sf.C * np.sqrt(0.1) * np.log(10.0))


def test_flat_projection_is_identity(flat_field):
    _, sf = flat_field
    projection = SmoothProjection(sf)
    a = projection(np.array([0.5, -0.3]), np.array([0.4, 0.6]), np.array([0.2, 0.8]))
    np.testing.assert_allclose(a, [[0.4, 0.2], [0.6, 0.8]], atol=1e-12)


def test_drift_field_reproduces_leaves(drift_field):
    entry, sf = drift_field
    for report in check_lemma3(sf, n=6):
        assert report.passed
    a = SmoothProjection(sf)(0.1, 0.5, 0.5)
    np.testing.assert_allclose(a, [[0.4, 0.5]], atol=1e-8)
    leaf = integrate_approx_leaf(sf, [0.4, 0.5], 0.3)
    np.testing.assert_allclose(leaf, [[0.7, 0.5]], atol=1e-8)


def test_project_pi_delta_follows_drift(drift_field):
    _, sf = drift_field
    np.testing.assert_allclose(project_pi_delta(sf, 0.1, 0.5, 0.5), [[0.4, 0.5]], atol=1e-8)


def test_curve_composite_reproduces_coordinate_on_flat(flat_field):
    entry, sf = flat_field
    psi = build_psi_curve(coordinate_function(1, "y1"), entry.family, 4, SmoothProjection(sf))
    # y1 = 0.25 is a grid leaf; 0.375 sits midway with equal weights
    values = psi(np.array([0.3, 0.3]), np.array([0.25, 0.375]), np.array([0.6, 0.6]))
    np.testing.assert_allclose(values, [0.25, 0.375], atol=1e-10)
    with pytest.raises(DomainError):
        build_psi_curve(coordinate_function(1, "y1"), entry.family, 0, SmoothProjection(sf))


def test_radius_respects_separation_constant(drift_field, rng):
    _, sf = drift_field
    projection = SmoothProjection(sf)
    disk = select_radius(projection)
    assert disk.center == (0.5, 0.5)
    assert 0 < disk.radius
    assert sf.C * disk.radius <= 0.5 + 1e-12
    assert check_pi_delta_roundtrip(projection, disk, rng, samples=50).passed


def test_corollary1_needs_small_delta_power(flat_field, rng):
    entry, sf = flat_field
    with pytest.raises(DomainError):
        check_corollary1(sf, entry.family, 0.2, 1.45, rng)
    report = check_corollary1(sf, entry.family, 0.5, 1.45, rng, leaves=4, stations=5)
    assert report.measured == pytest.approx(0.0, abs=1e-12)
    assert report.passed


def test_delta_must_be_below_delta0(catalog, rng):
    entry = catalog.get_by_name("flat-3d")
    with pytest.raises(DomainError):
        build_F_delta(entry.field, 0.3, entry.domain, 1.45, rng)


def test_bound_helpers():
    assert corollary1_window(0.5, 1.5) == pytest.approx(np.log(2.0) / 3.0)
    assert lemma5_bound(np.array([0.0]), 1.5, 0.01)[0] == pytest.approx(0.01)


def test_lemma3_on_flat_field(flat_field):
    _, sf = flat_field
    reports = check_lemma3(sf, n=5)
    assert [r.check for r in reports] == ["lemma3-i", "lemma3-ii"]
    for report in reports:
        assert report.measured == pytest.approx(0.0, abs=1e-15)
        assert report.bound > 0
        assert report.passed


def test_lemma5_holds_vacuously_without_deviation(flat_field, rng):
    entry, sf = flat_field
    report = check_lemma5(sf, entry.family, 1.5, rng, leaves=4, stations=6)
    assert report.measured == pytest.approx(0.0, abs=1e-12)
    assert report.vacuous
    assert report.passed
    with pytest.raises(DomainError):
        check_lemma5(sf, entry.family, 1.4, rng)


def test_translated_leaves_stay_inside_separation_envelopes(drift_field, rng):
    _, sf = drift_field
    lower, upper, rate = check_leaf_separation(sf, rng, pairs=5, spacing=1e-4, stations=9)
    assert [r.check for r in (lower, upper, rate)] == [
        "leaf-separation-lower",
        "leaf-separation-upper",
        "leaf-separation-rate",
    ]
    assert all(r.passed for r in (lower, upper, rate))
    # the drift translates leaves, so every pair keeps its starting gap
    assert upper.measured == pytest.approx(1e-4, rel=1e-6)
    assert rate.measured < 1e-8


def test_grad_pi_and_final_bound_on_drift(drift_field):
    entry, sf = drift_field
    projection = SmoothProjection(sf)
    grad, final = check_grad_pi_and_final(projection, entry.family, select_radius(projection), n=3)
    assert (grad.check, final.check) == ("grad-pi", "final-bound")
    assert grad.passed
    assert grad.measured <= grad.bound
    assert final.passed
    assert final.measured < 1e-5
