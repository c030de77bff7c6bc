from __future__ import annotations
import copy
import json
import os
from typing import Any, Optional

from lamination.domain import Domain
from lamination.ode import Rk4Integrator
from manager.family_manager import FamilyManager
from smoothing.cutoff import CHI_VARIANTS
from util.errors import ConfigError, DomainError

CONFIG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "config")
DEFAULTS_PATH = os.path.join(CONFIG_DIR, "defaults.json")

FORMAT = "experiment"
SUITES = ("assumption", "smooth2d", "surface", "curve")


def load_defaults() -> dict:
    with open(DEFAULTS_PATH, "r") as f:
        data = json.load(f)
    data.pop("Format", None)
    return data


def merge(defaults: dict, data: dict, path: str = "") -> dict:
    """
    Deep-merges `data` over `defaults`. Keys absent from the defaults are
    rejected with their dotted path; sections whose default is null are taken
    as given.
    """
    out = copy.deepcopy(defaults)
    for key, value in data.items():
        dotted = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError("unknown key", field=dotted)
        if isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                raise ConfigError("expected a section", field=dotted)
            out[key] = merge(defaults[key], value, dotted)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _real_list(values: Any, field: str) -> list[float]:
    if isinstance(values, (int, float)) and not isinstance(values, bool):
        values = [values]
    if not isinstance(values, list) or not values:
        raise ConfigError("expected a non-empty list of numbers", field=field)
    try:
        return [float(v) for v in values]
    except (TypeError, ValueError) as e:
        raise ConfigError(f"non-numeric entry: {e}", field=field) from e


def _positive_int(value: Any, field: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"expected an integer >= {minimum}, got {value!r}", field=field)
    return value


def _domain(value: Optional[dict], field: str) -> Optional[Domain]:
    if value is None:
        return None
    try:
        return Domain.from_dict(value)
    except (DomainError, TypeError, ValueError) as e:
        raise ConfigError(str(e), field=field) from e


class ExperimentConfig:
    """
    A validated experiment: which suite, on which family, over which delta and J
    sweeps, with which sampling densities and output location.
    """

    def __init__(self, data: dict):
        """
        Creates an ExperimentConfig from a fully merged dictionary; use from_dict
        for partial input.
        """
        self.data = data
        self.suite: str = data["suite"]
        self.family_id: str = data["family"]["id"]
        self.L: Optional[float] = data["family"]["L"]
        self.K: Optional[Domain] = _domain(data["domain"]["K"], "domain.K")
        self.center: Optional[list[float]] = data["domain"]["center"]

        smoothing = data["smoothing"]
        self.deltas: list[float] = _real_list(smoothing["delta"], "smoothing.delta")
        self.grid_j: list[int] = [
            _positive_int(j, "smoothing.J") for j in (smoothing["J"] if isinstance(smoothing["J"], list) else [smoothing["J"]])
        ]
        self.tau = float(smoothing["tau"])
        self.chi: str = smoothing["chi"]
        self.epsilon = float(smoothing["epsilon"])
        self.delta0 = float(smoothing["delta0"])

        integrator = data["integrator"]
        self.step = float(integrator["step"])
        self.tol = float(integrator["tol"])
        self.max_refinements = _positive_int(integrator["max_refinements"], "integrator.max_refinements", 0)

        self.sampling: dict[str, int] = {
            key: _positive_int(value, f"sampling.{key}") for key, value in data["sampling"].items()
        }
        self.out_dir: str = data["output"]["dir"]
        self.plots: bool = bool(data["output"]["plots"])
        self.seed = _positive_int(data["seed"], "seed", 0)
        self.workers = _positive_int(data["workers"], "workers")
        self.checks: list = data["checks"]
        self._validate()

    def _validate(self):
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite}, expected one of {SUITES}", field="suite")
        if not FamilyManager().is_known(self.family_id):
            raise ConfigError(f"unknown family {self.family_id}", field="family.id")
        if self.L is not None and not self.L > 0:
            raise ConfigError(f"L must be positive, got {self.L}", field="family.L")
        if not 0 < self.delta0 <= 1:
            raise ConfigError(f"delta0 must lie in (0, 1], got {self.delta0}", field="smoothing.delta0")
        for delta in self.deltas:
            if not 0 < delta < self.delta0:
                raise ConfigError(f"delta must lie in (0, {self.delta0:g}), got {delta:g}", field="smoothing.delta")
        if not 0 < self.tau < 1:
            raise ConfigError(f"tau must lie in (0, 1), got {self.tau:g}", field="smoothing.tau")
        if self.chi not in CHI_VARIANTS:
            raise ConfigError(f"unknown cutoff {self.chi}, expected one of {CHI_VARIANTS}", field="smoothing.chi")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}", field="smoothing.epsilon")
        if not (self.step > 0 and self.tol > 0):
            raise ConfigError("step and tol must be positive", field="integrator")
        if self.center is not None and (not isinstance(self.center, list) or len(self.center) != 2):
            raise ConfigError("expected two transversal coordinates", field="domain.center")
        if not isinstance(self.checks, list):
            raise ConfigError("expected a list of check names or objects", field="checks")
        for i, check in enumerate(self.checks):
            if not (isinstance(check, str) or (isinstance(check, dict) and "name" in check)):
                raise ConfigError("expected a check name or an object with a name", field=f"checks[{i}]")

    def integrator(self) -> Rk4Integrator:
        return Rk4Integrator(self.step, self.tol, self.max_refinements)

    def __str__(self):
        return f"ExperimentConfig.{self.suite}{{family={self.family_id}, deltas={self.deltas}}}"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ExperimentConfig) and self.to_dict() == other.to_dict()

    @classmethod
    def from_dict(cls, data: dict, defaults: Optional[dict] = None) -> ExperimentConfig:
        """
        Converts data loaded from JSON into a validated ExperimentConfig, filling
        every missing field from the defaults.
        """
        data = dict(data)
        fmt = data.pop("Format", FORMAT)
        if fmt != FORMAT:
            raise ConfigError(f"expected Format {FORMAT}, got {fmt}", field="Format")
        merged = merge(defaults if defaults is not None else load_defaults(), data)
        return cls(merged)

    def to_dict(self) -> dict:
        return {"Format": FORMAT, **copy.deepcopy(self.data)}

    def with_overrides(self, overrides: dict[str, Any]) -> ExperimentConfig:
        """
        A copy with dotted-path overrides applied, e.g. {"smoothing.delta": [0.1]}.
        Values of None are ignored.
        """
        data = copy.deepcopy(self.data)
        for dotted, value in overrides.items():
            if value is None:
                continue
            section = data
            *parents, leaf = dotted.split(".")
            for key in parents:
                section = section[key]
            if leaf not in section:
                raise ConfigError("unknown key", field=dotted)
            section[leaf] = value
        return ExperimentConfig(data)


def load_config(path: str) -> ExperimentConfig:
    """
    Loads and validates an experiment file.

    Raises:
        ConfigError: Syntax errors carry the line number; validation errors the field.
    """
    with open(path, "r") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(e.msg, field=path, line=e.lineno) from e
    if not isinstance(raw, dict):
        raise ConfigError("expected a JSON object", field=path)
    return ExperimentConfig.from_dict(raw)


def save_config(config: ExperimentConfig, path: str):
    with open(path, "w") as f:
        json.dump(config.to_dict(), f, indent=4)
