import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from lamination.domain import Domain
from lamination.log_lipschitz import check_ode_oracle
from lamination.ode import Rk4Integrator, family_from_slope_field, station_grid
from lamination.slope_field import SlopeField2D, load_sampled_field, probe_continuity
from manager.family_manager import CURVE2D, FamilyManager
from util.errors import ConfigError, LeafTruncated

DEMO_FIELD = "demo/sampled-osgood.txt"


def rising(x, y):
    return np.ones_like(y)


def test_exponential_growth():
    integrator = Rk4Integrator(step=1e-2, tol=1e-12)
    y = integrator.integrate(lambda x, y: y, 0.0, np.array([[1.0], [2.0]]), 1.0)
    np.testing.assert_allclose(y[:, 0], [np.e, 2 * np.e], rtol=1e-10)


def test_backward_integration():
    integrator = Rk4Integrator()
    y = integrator.integrate(rising, np.array([0.5, 1.0]), np.array([[0.5], [1.0]]), 0.0)
    np.testing.assert_allclose(y[:, 0], [0.0, 0.0], atol=1e-12)


def test_leaving_the_box():
    box = Domain([(-2.0, 2.0), (0.0, 1.0)])
    integrator = Rk4Integrator()
    with pytest.raises(LeafTruncated):
        integrator.integrate(rising, 0.0, np.array([[0.5]]), 2.0, box=box)
    y = integrator.integrate(rising, 0.0, np.array([[0.5], [0.0]]), 0.75, box=box, on_exit="nan")
    assert np.isnan(y[0, 0])
    assert y[1, 0] == pytest.approx(0.75)


def test_trajectory_runs_both_ways():
    stations = np.linspace(-1.0, 1.0, 9)
    values = Rk4Integrator().trajectory(rising, np.array([[0.25]]), stations)
    np.testing.assert_allclose(values[:, 0, 0], stations + 0.25, atol=1e-12)


def test_station_grid_contains_zero():
    grid = station_grid((-0.5, 1.0), spacing=0.25)
    assert 0.0 in grid
    assert grid[0] == -0.5
    assert grid[-1] == 1.0


def test_canonical_leaves_match_closed_form(catalog):
    entry = catalog.get_by_name("canonical-osgood")
    report = check_ode_oracle(entry.field, entry.family, Rk4Integrator(), leaves=5, x_max=1.0, stations=41)
    assert report.check == "ode-oracle"
    assert report.passed


def test_integrated_family_from_field(catalog):
    entry = catalog.get_by_name("affine")
    family = family_from_slope_field(entry.field, entry.domain, Rk4Integrator())
    assert family.provenance == "ode"
    assert float(family.evaluate(0.25, 0.5)) == pytest.approx(0.75, abs=1e-9)


def test_sampled_field_loads_as_planar_entry(monkeypatch, request):
    monkeypatch.chdir(request.config.rootpath)
    field = load_sampled_field(DEMO_FIELD)
    assert field.extent.interval(0) == pytest.approx((-1.0, 1.0))
    assert float(field(0.0, 0.5)) == pytest.approx(0.5 * np.log(2.0), abs=1e-2)

    entry = FamilyManager().get_by_name(f"slope-field:{DEMO_FIELD}")
    assert entry.kind == CURVE2D
    assert entry.L >= 1.45


def test_missing_sampled_field(tmp_path):
    with pytest.raises(ConfigError):
        FamilyManager().get_by_name(f"slope-field:{tmp_path / 'missing.txt'}")


def test_malformed_sampled_field(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2 2 1\n0 0 0 1\n")
    with pytest.raises(ConfigError) as e:
        load_sampled_field(str(path))
    assert e.value.line == 2


def test_continuity_check_only_warns(caplog, rng):
    domain = Domain([(-1.0, 1.0), (0.0, 1.0)])
    smooth = SlopeField2D("linear", lambda x, y: 2.0 * y)
    assert probe_continuity(smooth, domain, rng, samples=200) < 1e-5

    # period below the sampling step, so nearby points straddle sign changes
    ragged = SlopeField2D("ragged", lambda x, y: np.sign(np.sin(2e7 * y)))
    with caplog.at_level(logging.WARNING):
        worst = probe_continuity(ragged, domain, rng, samples=200)
    assert worst > 1.0
    assert "jump of" in caplog.text


@pytest.fixture
def affine_ode(catalog):
    entry = catalog.get_by_name("affine")
    return entry, family_from_slope_field(entry.field, entry.domain, Rk4Integrator())


def test_leaf_cache_integrates_a_batch_once_and_stays_bounded(affine_ode, rng, monkeypatch):
    entry, family = affine_ode
    cache = family.cache
    cache.max_leaves = 8
    calls = []
    integrate = cache._integrate
    monkeypatch.setattr(cache, "_integrate", lambda keys: calls.append(len(keys)) or integrate(keys))

    a = rng.uniform(0.0, 1.0, 20)
    values = family.evaluate(a, np.full(20, 0.5))
    np.testing.assert_allclose(values, entry.family.evaluate(a, 0.5), atol=1e-9)
    assert calls == [20]
    assert len(cache.leaves) == 8


def test_leaves_do_not_depend_on_their_batch(affine_ode, rng):
    _, family = affine_ode
    a = rng.uniform(0.0, 1.0, 6)
    x = np.linspace(-0.9, 0.9, 6)
    together = family.evaluate(a, x)
    family.cache.leaves.clear()
    alone = np.array([float(family.evaluate(ai, xi)) for ai, xi in zip(a, x)])
    np.testing.assert_array_equal(together, alone)


def test_leaf_cache_is_shared_across_threads(affine_ode, rng):
    _, family = affine_ode
    a = rng.uniform(0.0, 1.0, 40)
    x = np.full(40, -0.25)
    serial = family.evaluate(a, x)
    family.cache.leaves.clear()
    with ThreadPoolExecutor(max_workers=4) as pool:
        results = list(pool.map(lambda shift: family.evaluate(np.roll(a, shift), x), range(8)))
    for shift, values in enumerate(results):
        np.testing.assert_array_equal(values, np.roll(serial, shift))
    assert len(family.cache.leaves) == 40
    assert not family.cache.building
