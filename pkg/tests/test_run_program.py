import json

import pytest

from manager.run_program import run_sweep, verify
from report.emit import BOUNDS_HEADER, SMOOTH2D_HEADER, SURFACE_HEADER, emit_reports, read_bytes
from util.errors import ConfigError

FLAT_SWEEP = {
    "suite": "smooth2d",
    "family": {"id": "flat"},
    "smoothing": {"delta": [0.1, 0.05]},
    "sampling": {"samples": 200, "grid": 16},
    "checks": ["grid-leaf-exactness", "plateau", "h-monotone", "h-sup-error"],
}

CURVE_SAMPLING = {
    "probes": 16,
    "quadrature": 8,
    "strand_samples": 201,
    "leaves": 4,
    "stations": 9,
    "leaf_pairs": 5,
    "samples": 20,
    "pairs": 200,
    "sup_grid": 6,
    "disk_grid": 3,
}

CURVE_SWEEP = {
    "suite": "curve",
    "family": {"id": "drift-3d"},
    "smoothing": {"delta": [0.1, 0.05], "tau": 0.5},
    "sampling": CURVE_SAMPLING,
    "checks": ["lemma3", "blend-weights", "pi-delta-roundtrip", "corollary1", "leaf-separation", "grad-pi-final"],
}


def test_flat_sweep_passes(make_config):
    result = run_sweep(make_config(**FLAT_SWEEP))
    assert result.family == "flat"
    assert len(result.reports) == 8
    assert result.passed
    assert [r.check for r in result.reports[:2]] == ["grid-leaf-exactness", "grid-leaf-exactness"]
    assert [r.delta for r in result.reports[:2]] == [0.1, 0.05]


def test_emitted_tables(make_config, tmp_path):
    result = run_sweep(make_config(**FLAT_SWEEP))
    paths = emit_reports(result, str(tmp_path), summary=False)
    assert set(paths) == {"smooth2d.csv", "surface.csv", "bounds.csv"}

    smooth2d = (tmp_path / "smooth2d.csv").read_text().splitlines()
    assert smooth2d[0] == SMOOTH2D_HEADER
    assert len(smooth2d) == 9
    assert smooth2d[1].startswith("grid-leaf-exactness,flat,0.1,,")
    assert smooth2d[1].endswith(",true")
    assert (tmp_path / "surface.csv").read_text() == SURFACE_HEADER + "\n"
    assert (tmp_path / "bounds.csv").read_text() == BOUNDS_HEADER + "\n"


def test_tables_do_not_depend_on_workers(make_config, tmp_path):
    serial = run_sweep(make_config(**FLAT_SWEEP))
    threaded = run_sweep(make_config(**FLAT_SWEEP, workers=3))
    first = read_bytes(emit_reports(serial, str(tmp_path / "serial"), summary=False))
    second = read_bytes(emit_reports(threaded, str(tmp_path / "threaded"), summary=False))
    assert first == second


def test_curve_tables_repeat_under_threads(make_config, tmp_path):
    serial = run_sweep(make_config(**CURVE_SWEEP))
    emitted = [read_bytes(emit_reports(serial, str(tmp_path / "serial"), summary=False))]
    for run in ("threaded-1", "threaded-2"):
        result = run_sweep(make_config(**CURVE_SWEEP, workers=3))
        emitted.append(read_bytes(emit_reports(result, str(tmp_path / run), summary=False)))
    assert emitted[0] == emitted[1] == emitted[2]
    bounds = (tmp_path / "serial" / "bounds.csv").read_text().splitlines()
    assert len(bounds) > 1
    assert any(row.startswith("leaf-separation-upper,") for row in bounds)


def test_final_bound_converges_on_flat_leaves(make_config):
    config = make_config(
        suite="curve",
        family={"id": "flat-3d"},
        smoothing={"delta": [0.1, 0.05]},
        sampling=CURVE_SAMPLING,
        checks=["final-bound-convergence", "grad-pi-final"],
    )
    result = run_sweep(config)
    assert result.passed
    convergence = [r for r in result.reports if r.check == "final-bound-convergence"]
    assert [r.delta for r in convergence] == [0.1, 0.05]
    assert convergence[1].measured == pytest.approx(0.0, abs=1e-12)
    assert not convergence[1].strict


def test_failed_cell_is_reported(make_config):
    config = make_config(
        suite="curve",
        family={"id": "flat-3d"},
        smoothing={"delta": [0.2], "tau": 0.1},
        sampling={"probes": 16, "quadrature": 8, "strand_samples": 201, "leaves": 2, "stations": 5},
        checks=["corollary1"],
    )
    result = run_sweep(config)
    assert not result.passed
    (report,) = result.reports
    assert report.check == "corollary1"
    assert "not below 1/2" in report.reason
    assert report.params["family"] == "flat-3d"


def test_configuration_errors_abort_the_sweep(make_config):
    config = make_config(family={"id": "flat"}, checks=[{"name": "theorem1", "phi": "w", "J": 4, "delta": 0.1}])
    with pytest.raises(ConfigError):
        run_sweep(config)


@pytest.fixture
def acceptance_file(tmp_path):
    data = {
        "Format": "acceptance",
        "suites": [
            {
                "id": "T1",
                "title": "partition of unity",
                "config": {"sampling": {"pairs": 1000}, "checks": [{"name": "partition-of-unity", "js": [4, 16]}]},
            },
            {"id": "T2", "title": "flat staircase", "configs": [FLAT_SWEEP]},
        ],
        "determinism": {"id": "T3", "title": "repeatable tables", "repeat": ["T1", "T2"]},
    }
    path = tmp_path / "acceptance.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_verify_runs_selected_suites(acceptance_file, tmp_path, capsys):
    outcomes = verify(["T1", "T3"], str(tmp_path / "out"), path=acceptance_file)
    assert [o.id for o in outcomes] == ["T1", "T3"]
    assert all(o.passed for o in outcomes)
    printed = capsys.readouterr().out.splitlines()
    assert printed[0].startswith("T1 pass")
    assert (tmp_path / "out" / "T1" / "0-canonical-osgood" / "smooth2d.csv").exists()


def test_verify_rejects_unknown_suite(acceptance_file, tmp_path):
    with pytest.raises(ConfigError) as e:
        verify(["T9"], str(tmp_path / "out"), path=acceptance_file)
    assert e.value.field == "verify"
