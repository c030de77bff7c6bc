from __future__ import annotations
import logging
import os
from typing import TYPE_CHECKING, Any, Iterable

import numpy as np

from report.bound_report import BoundReport

if TYPE_CHECKING:
    from manager.run_program import SweepResult

logger = logging.getLogger(__name__)

SMOOTH2D_HEADER = "experiment,family,delta,J,sup_err_c0,sup_err_c1,bound_c0,bound_c1,pass"
SURFACE_HEADER = "experiment,family,delta,J,sup_err_c0,sup_err_c1x,sup_err_c1y,bound_c0,bound_c1,pass"
BOUNDS_HEADER = "check,delta,tau,L,C,R,measured,bound,margin,pass"

TABLES = {
    "smooth2d.csv": (SMOOTH2D_HEADER, ("smooth2d",)),
    "surface.csv": (SURFACE_HEADER, ("surface",)),
    "bounds.csv": (BOUNDS_HEADER, ("assumption", "curve")),
}


def fmt(value: Any) -> str:
    """One CSV cell: floats as %.10g, booleans as true/false, missing values empty."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.10g}"
    return str(value)


def _row(values: Iterable[Any]) -> str:
    return ",".join(fmt(v) for v in values)


def _group_smoothing(reports: list[BoundReport]) -> list[tuple[tuple, dict[str, BoundReport]]]:
    """Groups reports of one smoothing experiment by (check, family, delta, J), keyed by role."""
    groups: dict[tuple, dict[str, BoundReport]] = {}
    for report in reports:
        key = (report.check, report.params.get("family"), report.delta, report.params.get("J"))
        groups.setdefault(key, {})[report.role] = report
    return list(groups.items())


def smooth2d_rows(reports: list[BoundReport]) -> list[str]:
    rows = []
    for (check, family, delta, J), roles in _group_smoothing(reports):
        c0, c1 = roles.get("c0"), roles.get("c1")
        rows.append(
            _row(
                [
                    check,
                    family,
                    delta,
                    J,
                    c0.measured if c0 else None,
                    c1.measured if c1 else None,
                    c0.bound if c0 else None,
                    c1.bound if c1 else None,
                    all(r.passed for r in roles.values()),
                ]
            )
        )
    return rows


def surface_rows(reports: list[BoundReport]) -> list[str]:
    rows = []
    for (check, family, delta, J), roles in _group_smoothing(reports):
        c0, c1x, c1y = roles.get("c0"), roles.get("c1x"), roles.get("c1y")
        c1 = c1x or c1y
        rows.append(
            _row(
                [
                    check,
                    family,
                    delta,
                    J,
                    c0.measured if c0 else None,
                    c1x.measured if c1x else None,
                    c1y.measured if c1y else None,
                    c0.bound if c0 else None,
                    c1.bound if c1 else None,
                    all(r.passed for r in roles.values()),
                ]
            )
        )
    return rows


def bounds_rows(reports: list[BoundReport]) -> list[str]:
    rows = []
    for report in reports:
        p = report.params
        rows.append(
            _row(
                [
                    report.check,
                    p.get("delta"),
                    p.get("tau"),
                    p.get("L"),
                    p.get("C"),
                    p.get("R"),
                    report.measured,
                    report.bound,
                    report.margin,
                    report.passed,
                ]
            )
        )
    return rows


ROW_WRITERS = {
    "smooth2d.csv": smooth2d_rows,
    "surface.csv": surface_rows,
    "bounds.csv": bounds_rows,
}


def write_csv(path: str, header: str, rows: list[str]):
    with open(path, "w", newline="\n") as f:
        f.write(header + "\n")
        for row in rows:
            f.write(row + "\n")


def plot_file_name(report: BoundReport) -> str:
    delta = report.delta
    tag = "na" if delta is None else f"{delta:g}"
    if report.params.get("J") is not None:
        tag += f"_J{report.params['J']}"
    name = report.check if report.role == "c0" else f"{report.check}-{report.role}"
    return f"{name}_{tag}.dat"


def write_plot_data(directory: str, reports: list[BoundReport]) -> list[str]:
    """One whitespace-separated `x measured bound` file per (check, role, delta, J) that carries a series."""
    written = []
    for report in reports:
        if report.series is None or len(report.series) == 0:
            continue
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, plot_file_name(report))
        np.savetxt(path, report.series, fmt="%.10g", header="x measured bound")
        written.append(path)
    return written


def suite_summary(suite: str, reports: list[BoundReport]) -> str:
    passed = sum(r.passed for r in reports)
    failed = [r.check for r in reports if not r.passed]
    line = f"{suite}: {passed}/{len(reports)} reports pass"
    if failed:
        line += f" (failing: {', '.join(sorted(set(failed)))})"
    return line


def emit_reports(result: SweepResult, out_dir: str, summary: bool = True, plots: bool = True) -> dict[str, str]:
    """
    Writes the three CSV tables (header only when a table has no rows), the plot
    data files, and prints one summary line per suite.

    Args:
        result (SweepResult): Reports in their deterministic order.
        out_dir (str): Output directory, created when missing.
        plots (bool): Also write the plot data files.
    Returns:
        paths (dict[str, str]): Table file name to written path.
    """
    os.makedirs(out_dir, exist_ok=True)
    reports = result.reports
    paths = {}
    for name, (header, suites) in TABLES.items():
        members = [r for r in reports if r.suite in suites]
        path = os.path.join(out_dir, name)
        write_csv(path, header, ROW_WRITERS[name](members))
        paths[name] = path
    written = write_plot_data(os.path.join(out_dir, "plots"), reports) if plots else []
    logger.info(f"Wrote {len(paths)} tables and {len(written)} plot files to {out_dir}")

    if summary:
        for suite in dict.fromkeys(r.suite for r in reports):
            print(suite_summary(suite, [r for r in reports if r.suite == suite]))
    return paths


def read_bytes(paths: dict[str, str]) -> dict[str, bytes]:
    """Contents of every emitted table, for byte-for-byte run comparison."""
    out = {}
    for name, path in sorted(paths.items()):
        with open(path, "rb") as f:
            out[name] = f.read()
    return out
