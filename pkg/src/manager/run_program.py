from __future__ import annotations
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Optional

from check.base_check import Check
from check.load_checks import load_checks
from manager.experiment_config import CONFIG_DIR, ExperimentConfig
from manager.family_manager import FamilyManager
from report.bound_report import BoundReport
from report.emit import emit_reports, read_bytes
from state import AppState
from util.app_logger import init_check_logger
from util.errors import ConfigError, LaminationError

ACCEPTANCE_PATH = os.path.join(CONFIG_DIR, "acceptance.json")


class SweepResult:
    """
    Reports of one sweep in check order: by check name, then delta descending.
    The aggregate passes only when every member report passes.
    """

    def __init__(self, suite: str, family: str):
        self.suite = suite
        self.family = family
        self.reports: list[BoundReport] = []
        self.timings: dict[str, float] = {}

    def __str__(self):
        return f"SweepResult.{self.suite}{{family={self.family}, reports={len(self.reports)}}}"

    def add(self, check: Check, reports: list[BoundReport], seconds: float):
        self.reports.extend(reports)
        self.timings[str(check)] = seconds

    @property
    def passed(self) -> bool:
        return all(report.passed for report in self.reports)


def dispatch_check(check: Check, app_state: AppState) -> list[BoundReport]:
    logging.info(f"Check dispatched: {check}", extra=check.log_extra())
    return check.run(app_state)


def run_cell(app_state: AppState, check: Check) -> tuple[list[BoundReport], float]:
    """
    Runs one sweep cell. A LaminationError aborts only this cell, which is
    recorded as a failed report carrying the reason. Configuration errors
    abort the whole sweep.
    """
    check_logger = init_check_logger(check)
    started = time.perf_counter()
    try:
        reports = dispatch_check(check, app_state)
    except ConfigError:
        raise
    except LaminationError as e:
        check_logger.warning(f"Cell failed: {e}")
        reports = [
            BoundReport.failed(
                check.name,
                str(e),
                suite=check.suite,
                params={"family": check.entry.name, "delta": check.delta, "J": check.grid_j},
            )
        ]
    seconds = time.perf_counter() - started
    for report in reports:
        check_logger.info(str(report))
    return reports, seconds


def make_app_state(config: ExperimentConfig) -> AppState:
    return AppState(config, FamilyManager(integrator=config.integrator(), seed=config.seed))


def run_sweep(config: ExperimentConfig, app_state: Optional[AppState] = None) -> SweepResult:
    """
    Executes every requested check for each (delta, J) cell of the sweep.

    Cells run on up to `config.workers` threads. Every cell draws from its own
    generator, seeded by the run seed and the cell's position in the sorted
    check list, so the reports do not depend on scheduling.

    Raises:
        ConfigError: Unknown family or check, or a check that does not apply.
    """
    app_state = app_state if app_state is not None else make_app_state(config)
    entry = app_state.family_manager.get_by_name(config.family_id)
    checks = load_checks(config, entry.kind)
    for check in checks:
        check.prepare(app_state)
    logging.info(
        f"Sweep {config.suite} on {entry.name}: {len(checks)} cell(s), {config.workers} worker(s)",
        extra={"family": entry.to_dict()},
    )

    result = SweepResult(config.suite, entry.name)
    if config.workers == 1:
        outcomes = [run_cell(app_state, check) for check in checks]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(lambda check: run_cell(app_state, check), checks))
    for check, (reports, seconds) in zip(checks, outcomes):
        result.add(check, reports, seconds)
    logging.info(f"{result}: {'pass' if result.passed else 'FAIL'} after {app_state.elapsed():.2f}s")
    return result


class AcceptanceOutcome:
    def __init__(self, id: str, title: str, passed: bool, seconds: float, results: list[SweepResult]):
        self.id = id
        self.title = title
        self.passed = passed
        self.seconds = seconds
        self.results = results

    def __str__(self):
        status = "pass" if self.passed else "FAIL"
        return f"{self.id} {status} {self.seconds:.2f}s {self.title}"


def load_acceptance(path: str = ACCEPTANCE_PATH) -> dict:
    with open(path, "r") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(e.msg, field=path, line=e.lineno) from e
    if data.get("Format") != "acceptance":
        raise ConfigError(f"expected Format acceptance, got {data.get('Format')}", field="Format")
    return data


def _suite_configs(suite: dict, overrides: dict[str, Any]) -> list[ExperimentConfig]:
    return [
        ExperimentConfig.from_dict(raw).with_overrides(overrides)
        for raw in suite.get("configs", [suite.get("config")])
    ]


def run_acceptance_suite(suite: dict, out_dir: str, overrides: dict[str, Any]) -> AcceptanceOutcome:
    """Runs every config of one suite, each into its own output directory."""
    started = time.perf_counter()
    results = []
    for i, config in enumerate(_suite_configs(suite, overrides)):
        result = run_sweep(config)
        emit_reports(result, os.path.join(out_dir, suite["id"], f"{i}-{config.family_id}"), summary=False)
        results.append(result)
    passed = all(r.passed for r in results)
    return AcceptanceOutcome(suite["id"], suite.get("title", ""), passed, time.perf_counter() - started, results)


def run_determinism(determinism: dict, suites: dict[str, dict], out_dir: str, overrides: dict[str, Any]) -> AcceptanceOutcome:
    """Runs the named suites (all of them by default) twice and compares every emitted table byte for byte."""
    started = time.perf_counter()
    contents = []
    for run in ("run1", "run2"):
        emitted: dict[str, bytes] = {}
        for suite_id in determinism.get("repeat", list(suites)):
            for i, config in enumerate(_suite_configs(suites[suite_id], overrides)):
                result = run_sweep(config)
                directory = os.path.join(out_dir, determinism["id"], run, suite_id, str(i))
                for name, data in read_bytes(emit_reports(result, directory, summary=False)).items():
                    emitted[f"{suite_id}/{i}/{name}"] = data
        contents.append(emitted)
    differing = [name for name in contents[0] if contents[0][name] != contents[1].get(name)]
    if differing:
        logging.warning(f"Determinism: {len(differing)} table(s) differ: {', '.join(differing)}")
    return AcceptanceOutcome(determinism["id"], determinism.get("title", ""), not differing, time.perf_counter() - started, [])


def verify(
    selection: Optional[list[str]],
    out_dir: str,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
    path: str = ACCEPTANCE_PATH,
) -> list[AcceptanceOutcome]:
    """
    Runs the acceptance suites, all of them when `selection` is None, and
    prints one line per suite.
    """
    data = load_acceptance(path)
    suites = {suite["id"]: suite for suite in data["suites"]}
    determinism = data.get("determinism")
    known = list(suites) + ([determinism["id"]] if determinism else [])
    wanted = known if selection is None else selection
    for suite_id in wanted:
        if suite_id not in known:
            raise ConfigError(f"unknown acceptance suite {suite_id}; known: {', '.join(known)}", field="verify")

    overrides = {"seed": seed, "workers": workers}
    outcomes = []
    for suite_id in wanted:
        if determinism and suite_id == determinism["id"]:
            outcome = run_determinism(determinism, suites, out_dir, overrides)
        else:
            outcome = run_acceptance_suite(suites[suite_id], out_dir, overrides)
        print(outcome)
        outcomes.append(outcome)
    return outcomes
