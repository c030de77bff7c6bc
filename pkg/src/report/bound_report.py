from __future__ import annotations
from typing import Any, Optional

import numpy as np

from util.types import FloatArray

SAMPLED_SUP_NOTE = "sampled sup is a lower bound on the true sup"


class BoundReport:
    """
    One measured quantity against one bound: the atomic result of every check.

    A report passes when margin = bound - measured >= -slack, or margin > 0
    when the comparison is strict.
    """

    def __init__(
        self,
        check: str,
        measured: float,
        bound: float,
        slack: float = 0.0,
        strict: bool = False,
        suite: str = "",
        role: str = "c0",
        params: Optional[dict[str, Any]] = None,
        grid: str = "",
        notes: Optional[list[str]] = None,
        series: Optional[FloatArray] = None,
        vacuous: bool = False,
        reason: Optional[str] = None,
    ):
        """
        Creates a BoundReport.

        Args:
            check (str): Name of the check that produced it.
            measured (float): Measured left-hand side.
            bound (float): Right-hand side.
            slack (float): Allowed overshoot.
            strict (bool): Require a strictly positive margin.
            suite (str): Suite the check belongs to, selects the CSV schema.
            role (str): Column role in the smoothing tables: c0, c1, c1x or c1y.
            params (Optional[dict]): family, delta, J, tau, L, C, R as applicable.
            grid (str): Description of the sample set.
            notes (Optional[list[str]]): Free-form remarks.
            series (Optional[FloatArray]): (n, 3) rows of (x, measured, bound) for plot data.
            vacuous (bool): No sample satisfied the check's hypotheses.
            reason (Optional[str]): Set when the cell failed to run.
        """
        self.check = check
        self.measured = float(measured)
        self.bound = float(bound)
        self.slack = float(slack)
        self.strict = strict
        self.suite = suite
        self.role = role
        self.params: dict[str, Any] = dict(params or {})
        self.grid = grid
        self.notes: list[str] = list(notes or [])
        self.series = series
        self.vacuous = vacuous
        self.reason = reason

    @classmethod
    def from_pointwise(
        cls,
        check: str,
        measured: FloatArray,
        bound: FloatArray | float,
        xs: Optional[FloatArray] = None,
        **kwargs,
    ) -> BoundReport:
        """
        Reduces a pointwise comparison to its worst point.

        Args:
            measured (FloatArray): Measured values per sample.
            bound (FloatArray | float): Bound per sample, or one shared bound.
            xs (Optional[FloatArray]): Abscissae, kept as plot series when given.
        """
        measured = np.asarray(measured, dtype=float).ravel()
        bound = np.broadcast_to(np.asarray(bound, dtype=float), measured.shape).ravel()
        if measured.size == 0:
            return cls(check, 0.0, float(bound.max(initial=np.inf)), vacuous=True, **kwargs)
        worst = int(np.argmin(bound - measured))
        series = None
        if xs is not None:
            order = np.argsort(np.asarray(xs).ravel(), kind="stable")
            series = np.column_stack(
                [np.asarray(xs).ravel()[order], measured[order], bound[order]]
            )
        return cls(check, measured[worst], bound[worst], series=series, **kwargs)

    @classmethod
    def failed(cls, check: str, reason: str, **kwargs) -> BoundReport:
        return cls(check, np.nan, np.nan, reason=reason, **kwargs)

    @property
    def margin(self) -> float:
        return self.bound - self.measured

    @property
    def passed(self) -> bool:
        if self.reason is not None:
            return False
        if self.strict:
            return bool(self.margin > 0)
        return bool(self.margin >= -self.slack)

    @property
    def delta(self) -> Optional[float]:
        return self.params.get("delta")

    def __str__(self):
        status = "pass" if self.passed else "FAIL"
        return (
            f"BoundReport.{self.check}{{measured={self.measured:.6g}, "
            f"bound={self.bound:.6g}, {status}}}"
        )

    def to_dict(self):
        return {
            "check": self.check,
            "suite": self.suite,
            "role": self.role,
            "measured": self.measured,
            "bound": self.bound,
            "margin": self.margin,
            "slack": self.slack,
            "strict": self.strict,
            "passed": self.passed,
            "params": self.params,
            "grid": self.grid,
            "notes": self.notes,
            "vacuous": self.vacuous,
            "reason": self.reason,
        }
