from __future__ import annotations
from abc import ABC
from typing import Callable, Dict, Optional

from check.check_parser import CheckParser
from lamination.partial_function import PartialSmoothFunction, named_function
from manager.family_manager import CURVE2D, CURVE3D, SURFACE, CatalogEntry
from report.bound_report import BoundReport
from state import AppState
from util.errors import ConfigError


class Check(ABC):
    """
    An abstract base class representing one named verification bound to a sweep
    cell. Subclasses set which suite they belong to, which family kinds they
    apply to, and whether they are repeated per delta and per J.
    """

    suite: str = ""
    kinds: tuple[str, ...] = (CURVE2D, SURFACE, CURVE3D)
    per_delta: bool = True
    uses_grid_j: bool = False

    def __init__(self, parser: CheckParser):
        """
        Creates a Check.

        Args:
            parser (CheckParser): Parsed check data.
        """
        super().__init__()
        self.name: str = parser.name
        self.delta: Optional[float] = parser.delta
        self.grid_j: Optional[int] = parser.grid_j
        self.parser = parser
        self.args: Dict = parser.args
        self.index: int = 0
        self.entry: CatalogEntry
        self.prepare_actions: list[Callable[[AppState], None]] = []
        self.add_prepare_action(self._set_entry)

    def _set_entry(self, app_state: AppState):
        self.entry = app_state.family_manager.get_by_name(app_state.config.family_id)

    def add_prepare_action(self, action: Callable[[AppState], None]):
        self.prepare_actions.append(action)

    def prepare(self, app_state: AppState):
        for action in self.prepare_actions:
            action(app_state)

    def run(self, app_state: AppState) -> list[BoundReport]:
        raise NotImplementedError("Check wasn't implemented")

    def L(self, app_state: AppState) -> float:
        """The configured L, else the catalog's declared L."""
        return app_state.config.L if app_state.config.L is not None else self.entry.L

    def sampling(self, app_state: AppState, key: str) -> int:
        return self.parser.get_int(key, app_state.config.sampling[key])

    def test_function(self, name: str) -> PartialSmoothFunction:
        try:
            return named_function(name, self.entry.family)
        except ValueError as e:
            raise ConfigError(str(e), field=f"checks.{self.name}.phi") from e

    def log_extra(self):
        """Return extra information for logging"""
        return {
            "check": self.name,
            "delta": self.delta,
            "grid_j": self.grid_j,
        }

    def __str__(self):
        cell = []
        if self.delta is not None:
            cell.append(f"delta={self.delta:g}")
        if self.grid_j is not None:
            cell.append(f"J={self.grid_j}")
        return f"Check.{self.name}{{{', '.join(cell)}}}"
