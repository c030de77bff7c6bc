import json
import logging
from typing import Optional, Self

from check.base_check import Check
from check.check_parser import CheckParser
from check.check_types import CheckTypes
from manager.experiment_config import ExperimentConfig
from util.errors import ConfigError

logger = logging.getLogger(__name__)


class SortableCheck:
    def __init__(self, check: Check):
        self.check: Check = check
        self.name: str = check.name
        # Larger deltas first; a missing delta sorts ahead of every real one
        self.delta_key: float = -check.delta if check.delta is not None else float("-inf")
        self.grid_j: int = check.grid_j if check.grid_j is not None else 0
        self.args_json: str = json.dumps(check.args, sort_keys=True, default=str)

    def __lt__(self, other: Self) -> bool:
        # Order by name
        if self.name != other.name:
            return self.name < other.name

        # Order by delta, descending
        if self.delta_key != other.delta_key:
            return self.delta_key < other.delta_key

        # Order by J
        if self.grid_j != other.grid_j:
            return self.grid_j < other.grid_j

        # Order by args; the JSON text is stable across runs where hash() is not
        return self.args_json < other.args_json


def _requested(config: ExperimentConfig) -> list[tuple[dict, bool]]:
    """(check data, explicitly requested) for the configured checks, or the whole suite."""
    if config.checks:
        return [
            ({"name": item} if isinstance(item, str) else dict(item), True) for item in config.checks
        ]
    return [({"name": name}, False) for name in CheckTypes.names(config.suite)]


def expand_check(config: ExperimentConfig, kind: str, data: dict, explicit: bool) -> list[Check]:
    """
    One Check per sweep cell: per delta for per-delta checks, and per delta and J
    for checks that use the partition of unity.
    """
    data = dict(data)
    name = str(data.pop("name"))
    creator = CheckTypes.lookup(config.suite, name)
    if kind not in creator.kinds:
        if explicit:
            raise ConfigError(f"check {name} does not apply to {kind} families", field="checks")
        logger.info(f"Skipping {name}: does not apply to {kind} families")
        return []

    deltas: list[Optional[float]] = [None]
    if creator.per_delta:
        raw = data.pop("delta", config.deltas)
        deltas = [float(d) for d in (raw if isinstance(raw, list) else [raw])]
    grid_js: list[Optional[int]] = [None]
    if creator.uses_grid_j:
        raw = data.pop("J", config.grid_j)
        grid_js = [int(j) for j in (raw if isinstance(raw, list) else [raw])]

    parsers = [
        CheckParser(config.suite, name=name, delta=delta, J=grid_j, **data)
        for delta in deltas
        for grid_j in grid_js
    ]
    return [CheckTypes.create_check(parser) for parser in parsers]


def load_checks(config: ExperimentConfig, kind: str) -> list[Check]:
    checks: list[Check] = []
    for data, explicit in _requested(config):
        checks.extend(expand_check(config, kind, data, explicit))
    checks = sort_checks(checks)
    for index, check in enumerate(checks):
        check.index = index
    return checks


def sort_checks(checks: list[Check]) -> list[Check]:
    """Sorts checks by name, delta (descending), J and arguments."""
    sortable_checks = [SortableCheck(c) for c in checks]
    sorted_checks = sorted(sortable_checks)
    return [c.check for c in sorted_checks]
