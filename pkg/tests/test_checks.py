import pytest

from check.check_parser import CheckParser
from check.check_types import CheckTypes
from check.load_checks import load_checks
from manager.family_manager import CURVE2D, CURVE3D, SURFACE
from manager.run_program import make_app_state
from util.errors import ConfigError


def cells(checks):
    return [(c.name, c.delta, c.grid_j) for c in checks]


def test_cells_are_ordered_by_name_then_delta_descending(make_config):
    config = make_config(
        family={"id": "flat"},
        smoothing={"delta": [0.05, 0.1]},
        checks=["plateau", "grid-leaf-exactness"],
    )
    checks = load_checks(config, CURVE2D)
    assert cells(checks) == [
        ("grid-leaf-exactness", 0.1, None),
        ("grid-leaf-exactness", 0.05, None),
        ("plateau", 0.1, None),
        ("plateau", 0.05, None),
    ]
    assert [c.index for c in checks] == [0, 1, 2, 3]


def test_whole_suite_when_no_checks_are_named(make_config):
    config = make_config(smoothing={"delta": [0.1, 0.05], "J": [8, 16]})
    checks = load_checks(config, CURVE2D)
    names = {c.name for c in checks}
    assert names == set(CheckTypes.names("smooth2d"))
    assert sum(c.name == "partition-of-unity" for c in checks) == 1
    assert sum(c.name == "theorem1" for c in checks) == 4
    assert sum(c.name == "plateau" for c in checks) == 2


def test_per_check_delta_and_J(make_config):
    config = make_config(checks=[{"name": "theorem1", "delta": 0.05, "J": [16, 8], "phi": "x"}])
    checks = load_checks(config, CURVE2D)
    assert cells(checks) == [("theorem1", 0.05, 8), ("theorem1", 0.05, 16)]
    assert checks[0].phi_name == "x"


def test_check_names_are_case_insensitive():
    assert CheckTypes.lookup("smooth2d", "Plateau") is CheckTypes.lookup("smooth2d", "plateau")
    parser = CheckParser("surface", name="PROP2", delta=0.1)
    assert CheckTypes.create_check(parser).name == "prop2"


def test_unknown_check(make_config):
    config = make_config(checks=["theorem9"])
    with pytest.raises(ConfigError) as e:
        load_checks(config, CURVE2D)
    assert e.value.field == "checks"


def test_inapplicable_check(make_config):
    explicit = make_config(suite="curve", family={"id": "canonical-osgood"}, checks=["lemma3"])
    with pytest.raises(ConfigError):
        load_checks(explicit, CURVE2D)
    implicit = make_config(suite="curve", family={"id": "canonical-osgood"})
    assert load_checks(implicit, CURVE2D) == []


def test_assumption_suite_covers_every_kind(make_config):
    config = make_config(suite="assumption", checks=["monotone-ordering", "projection-roundtrip"])
    for kind in (CURVE2D, SURFACE, CURVE3D):
        assert len(load_checks(config, kind)) == 2


def test_typed_arguments():
    parser = CheckParser("curve", name="corollary1", tau=0.5, js=[4, 16], probes=8)
    assert parser.get_float("tau", 0.25, lo=0.0, hi=1.0) == 0.5
    assert parser.get_float("epsilon") is None
    assert parser.get_int_list("js", [32]) == [4, 16]
    assert parser.get_int_list("missing", [32]) == [32]
    assert parser.get_int("probes", 256) == 8


@pytest.mark.parametrize(
    "args, getter",
    [
        ({"tau": 1.5}, lambda p: p.get_float("tau", lo=0.0, hi=1.0)),
        ({"tau": "half"}, lambda p: p.get_float("tau")),
        ({"tau": 0}, lambda p: p.get_int("tau", 1)),
        ({"tau": [4, 0]}, lambda p: p.get_int_list("tau", [1])),
    ],
)
def test_invalid_arguments_name_their_key(args, getter):
    parser = CheckParser("curve", name="corollary1", **args)
    with pytest.raises(ConfigError) as e:
        getter(parser)
    assert e.value.field == "checks.corollary1.tau"


def test_prepare_sets_entry_and_compact_set(make_config):
    config = make_config(
        family={"id": "flat"},
        domain={"K": {"x": [-0.5, 0.5], "y": [0.0, 1.0]}},
        checks=[{"name": "plateau", "K": {"x": [-0.25, 0.25], "y": [0.2, 0.8]}}, "h-monotone"],
    )
    app_state = make_app_state(config)
    checks = load_checks(config, CURVE2D)
    for check in checks:
        check.prepare(app_state)
    by_name = {c.name: c for c in checks}
    assert by_name["plateau"].K.interval(0) == (-0.25, 0.25)
    assert by_name["h-monotone"].K.interval(0) == (-0.5, 0.5)
    assert by_name["h-monotone"].entry.name == "flat"


def test_invalid_compact_set(make_config):
    config = make_config(family={"id": "flat"}, checks=[{"name": "plateau", "K": {"x": [1, 0], "y": [0, 1]}}])
    app_state = make_app_state(config)
    with pytest.raises(ConfigError) as e:
        load_checks(config, CURVE2D)[0].prepare(app_state)
    assert e.value.field == "checks.K"
