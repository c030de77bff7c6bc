import argparse
import json

import pytest

from main import WORKERS_ENV, build_verify_config, main, parse_args, parse_list, resolve_workers


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(WORKERS_ENV, raising=False)
    return tmp_path


def write_experiment(path):
    data = {
        "Format": "experiment",
        "suite": "smooth2d",
        "family": {"id": "canonical-osgood"},
        "sampling": {"samples": 100, "grid": 8},
        "checks": ["grid-leaf-exactness", "h-monotone"],
    }
    path.write_text(json.dumps(data))


def test_sweep_from_file(workdir, capsys):
    write_experiment(workdir / "exp.json")
    code = main(["sweep", "--config", "exp.json", "--family", "flat", "--delta", "0.1", "--out", "out"])
    assert code == 0
    assert "smooth2d: 2/2 reports pass" in capsys.readouterr().out
    rows = (workdir / "out" / "smooth2d.csv").read_text().splitlines()
    assert len(rows) == 3
    assert rows[1].split(",")[1] == "flat"


def test_invalid_delta_is_reported(workdir, capsys):
    assert main(["smooth2d", "--delta", "0.5"]) == 1
    out = capsys.readouterr().out
    assert out.startswith("error:")
    assert "smoothing.delta" in out


def test_unknown_family(workdir, capsys):
    assert main(["smooth3d-curve", "--family", "helix"]) == 1
    assert "family.id" in capsys.readouterr().out


def test_workers_environment(workdir, monkeypatch, capsys):
    args = parse_args(["smooth2d", "--workers", "2"])
    assert resolve_workers(args) == 2
    monkeypatch.setenv(WORKERS_ENV, "4")
    assert resolve_workers(args) == 4

    monkeypatch.setenv(WORKERS_ENV, "many")
    assert main(["smooth2d"]) == 1
    assert WORKERS_ENV in capsys.readouterr().out


def test_parse_list():
    assert parse_list("0.1,0.05", float) == [0.1, 0.05]
    assert parse_list("4,16,", int) == [4, 16]
    with pytest.raises(argparse.ArgumentTypeError):
        parse_list("4,x", int)


def test_verify_arguments():
    args = parse_args(["verify", "A1", "A3", "--seed", "3"])
    assert args.suites == ["A1", "A3"]
    assert args.seed == 3
    assert not args.all


@pytest.mark.parametrize("flag, value", [("--family", "flat"), ("--delta", "0.1"), ("--config", "x.json")])
def test_verify_rejects_sweep_arguments(flag, value):
    with pytest.raises(SystemExit):
        parse_args(["verify", "--all", flag, value])


def test_verify_config_takes_output_arguments(workdir):
    config = build_verify_config(parse_args(["verify", "A1", "--out", "acceptance", "--seed", "7"]))
    assert config.out_dir == "acceptance"
    assert config.seed == 7
