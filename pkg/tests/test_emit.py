import os

import numpy as np

from report.bound_report import BoundReport
from report.emit import bounds_rows, fmt, plot_file_name, smooth2d_rows, suite_summary, surface_rows, write_plot_data


def report(check, measured, bound, role="c0", **params):
    suite = params.pop("suite", "smooth2d")
    return BoundReport(check, measured, bound, suite=suite, role=role, params=params)


def test_fmt():
    assert fmt(None) == ""
    assert fmt(True) == "true"
    assert fmt(np.bool_(False)) == "false"
    assert fmt(0.1) == "0.1"
    assert fmt(np.float64(1 / 3)) == "0.3333333333"
    assert fmt(32) == "32"


def test_smooth2d_rows_join_roles():
    reports = [
        report("theorem1", 0.01, 0.05, family="flat", delta=0.1, J=8),
        report("theorem1", 0.2, 0.05, role="c1", family="flat", delta=0.1, J=8),
        report("plateau", 0.0, 0.0, family="flat", delta=0.1),
    ]
    assert smooth2d_rows(reports) == [
        "theorem1,flat,0.1,8,0.01,0.2,0.05,0.05,false",
        "plateau,flat,0.1,,0,,0,,true",
    ]


def test_surface_rows():
    reports = [
        report("prop2", 0.001, 0.01, suite="surface", family="tilted-surface", delta=0.05),
        report("prop2", 0.002, 0.01, role="c1x", suite="surface", family="tilted-surface", delta=0.05),
        report("prop2", 0.003, 0.01, role="c1y", suite="surface", family="tilted-surface", delta=0.05),
    ]
    assert surface_rows(reports) == ["prop2,tilted-surface,0.05,,0.001,0.002,0.003,0.01,0.01,true"]


def test_bounds_rows():
    rows = bounds_rows([report("lemma3", 0.1, 0.5, suite="curve", delta=0.1, L=1.5, C=2.0, R=0.25)])
    assert rows == ["lemma3,0.1,,1.5,2,0.25,0.1,0.5,0.4,true"]


def test_plot_file_names():
    assert plot_file_name(report("lemma2", 0.0, 1.0, delta=0.05)) == "lemma2_0.05.dat"
    assert plot_file_name(report("theorem1", 0.0, 1.0, role="c1", delta=0.1)) == "theorem1-c1_0.1.dat"
    assert plot_file_name(report("theorem1", 0.0, 1.0, role="c1", delta=0.1, J=16)) == "theorem1-c1_0.1_J16.dat"
    assert plot_file_name(report("lemma1", 0.0, 1.0)) == "lemma1_na.dat"


def test_plot_data_keeps_every_J(tmp_path):
    xs = np.array([0.0, 0.5])
    reports = [
        BoundReport.from_pointwise("theorem1", xs * 0.01, 0.05, xs=xs, role="c1", params={"delta": 0.1, "J": J})
        for J in (8, 16)
    ]
    written = write_plot_data(str(tmp_path / "plots"), reports)
    assert sorted(os.path.basename(p) for p in written) == ["theorem1-c1_0.1_J16.dat", "theorem1-c1_0.1_J8.dat"]


def test_write_plot_data(tmp_path):
    xs = np.array([0.5, 0.0, 1.0])
    with_series = BoundReport.from_pointwise("lemma2", xs * 0.1, 1.0, xs=xs, params={"delta": 0.1})
    without = report("plateau", 0.0, 0.0, delta=0.1)
    written = write_plot_data(str(tmp_path / "plots"), [with_series, without])
    assert len(written) == 1
    data = np.loadtxt(written[0])
    np.testing.assert_allclose(data[:, 0], [0.0, 0.5, 1.0])
    assert open(written[0]).readline() == "# x measured bound\n"


def test_suite_summary():
    reports = [report("plateau", 0.0, 0.0), report("lemma2", 2.0, 1.0), report("lemma2", 3.0, 1.0)]
    assert suite_summary("smooth2d", reports) == "smooth2d: 1/3 reports pass (failing: lemma2)"
