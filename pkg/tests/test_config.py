import pytest

from lamination.domain import Domain
from lamination.ode import Rk4Integrator
from manager.experiment_config import ExperimentConfig, load_config, save_config
from util.errors import ConfigError


def test_defaults(make_config):
    config = make_config()
    assert config.suite == "smooth2d"
    assert config.family_id == "canonical-osgood"
    assert config.deltas == [0.1, 0.05, 0.025, 0.0125]
    assert config.grid_j == [32]
    assert config.chi == "cubic"
    assert config.workers == 1
    assert config.K is None
    assert config.checks == []


def test_scalar_delta_and_J_become_lists(make_config):
    config = make_config(smoothing={"delta": 0.05, "J": 8})
    assert config.deltas == [0.05]
    assert config.grid_j == [8]


@pytest.mark.parametrize(
    "data, field",
    [
        ({"smoothing": {"delta": [0.5]}}, "smoothing.delta"),
        ({"smoothing": {"delta": []}}, "smoothing.delta"),
        ({"smoothing": {"tau": 1.0}}, "smoothing.tau"),
        ({"smoothing": {"chi": "linear"}}, "smoothing.chi"),
        ({"smoothing": {"J": [0]}}, "smoothing.J"),
        ({"smoothing": {"bogus": 1}}, "smoothing.bogus"),
        ({"suite": "fluid"}, "suite"),
        ({"family": {"id": "nowhere"}}, "family.id"),
        ({"family": {"L": -1.0}}, "family.L"),
        ({"sampling": {"grid": 0}}, "sampling.grid"),
        ({"domain": {"K": {"x": [0, 1]}}}, "domain.K"),
        ({"domain": {"center": [0.5]}}, "domain.center"),
        ({"checks": [{"J": 4}]}, "checks[0]"),
        ({"workers": 0}, "workers"),
    ],
)
def test_invalid_values_name_their_field(make_config, data, field):
    with pytest.raises(ConfigError) as e:
        make_config(**data)
    assert e.value.field == field


def test_format_must_be_experiment():
    with pytest.raises(ConfigError) as e:
        ExperimentConfig.from_dict({"Format": "acceptance"})
    assert e.value.field == "Format"


def test_slope_field_ids_are_accepted(make_config):
    config = make_config(family={"id": "slope-field:demo/sampled-osgood.txt"})
    assert config.family_id.startswith("slope-field:")


def test_overrides(make_config):
    config = make_config().with_overrides({"smoothing.delta": [0.05], "seed": None, "family.id": "flat"})
    assert config.deltas == [0.05]
    assert config.seed == 0
    assert config.family_id == "flat"
    with pytest.raises(ConfigError) as e:
        config.with_overrides({"smoothing.width": 1})
    assert e.value.field == "smoothing.width"


def test_overrides_are_validated(make_config):
    with pytest.raises(ConfigError) as e:
        make_config().with_overrides({"smoothing.delta": [0.5]})
    assert e.value.field == "smoothing.delta"


def test_save_and_load(make_config, tmp_path):
    config = make_config(family={"id": "flat"}, domain={"K": {"x": [-1, 1], "y": [0, 1]}}, seed=7)
    path = tmp_path / "experiment.json"
    save_config(config, str(path))
    loaded = load_config(str(path))
    assert loaded == config
    assert loaded.K.bounds == ((-1.0, 1.0), (0.0, 1.0))


def test_syntax_error_carries_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n    "suite": "smooth2d",\n    "seed": oops\n}\n')
    with pytest.raises(ConfigError) as e:
        load_config(str(path))
    assert e.value.line == 3


def test_integrator_from_config(make_config):
    integrator = make_config(integrator={"tol": 1e-8}).integrator()
    assert isinstance(integrator, Rk4Integrator)
    assert integrator.tol == 1e-8
    assert integrator.step == 0.001


def test_polydisk_K_survives_save_and_load(make_config, tmp_path):
    disk = Domain.polydisk(0.25, (0.5, 0.5))
    config = make_config(suite="curve", family={"id": "flat-3d"}, domain={"K": disk.to_dict()})
    path = tmp_path / "experiment.json"
    save_config(config, str(path))
    loaded = load_config(str(path))
    assert loaded.K.radius == 0.25
    assert loaded.K.center == (0.5, 0.5)
    assert loaded.K.bounds == disk.bounds
