from __future__ import annotations
from typing import Optional, override

from check.base_check import Check
from check.check_parser import CheckParser
from lamination.domain import Domain
from manager.family_manager import CURVE2D, CatalogEntry
from report.bound_report import BoundReport
from smoothing.cutoff import CutoffChi
from smoothing.estimates import (
    check_grid_leaf_exactness,
    check_h_derivative,
    check_h_monotone,
    check_h_sup_error,
    check_lemma2,
    check_plateau,
    convergence_report,
    measure_h_errors,
    report_theorem1,
)
from smoothing.partition import check_partition_of_unity
from smoothing.transversal import TransversalSmoother, parameter_span
from state import AppState
from util.errors import ConfigError


def compact_set(app_state: AppState, entry: CatalogEntry, override_K: Optional[dict] = None) -> Domain:
    """K from the check's own arguments, else the config, else the catalog default."""
    if override_K is not None:
        try:
            return Domain.from_dict(override_K)
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e), field="checks.K") from e
    return app_state.config.K if app_state.config.K is not None else entry.K


def smoother_for(app_state: AppState, entry: CatalogEntry, delta: float, K: Domain) -> TransversalSmoother:
    """h_delta over K, built once per (family, delta, K) and shared between cells."""
    chi = app_state.config.chi

    def build():
        span = parameter_span(entry.family, K.grid(16 if entry.family.base_dim == 1 else 8))
        return TransversalSmoother(entry.family, delta, CutoffChi(chi), span)

    return app_state.cached(f"h:{entry.name}:{delta!r}:{chi}:{K}", build)


def previous_delta(app_state: AppState, delta: float) -> Optional[float]:
    """The next larger delta of the sweep, or None for the largest."""
    larger = [d for d in app_state.config.deltas if d > delta]
    return min(larger) if larger else None


class SmoothingCheck(Check):
    suite = "smooth2d"
    kinds = (CURVE2D,)

    def __init__(self, parser: CheckParser):
        super().__init__(parser)
        self.K: Domain

        def set_K(app_state: AppState):
            self.K = compact_set(app_state, self.entry, parser.get_arg("K"))

        self.add_prepare_action(set_K)

    def smoother(self, app_state: AppState, delta: Optional[float] = None) -> TransversalSmoother:
        return smoother_for(app_state, self.entry, delta if delta is not None else self.delta, self.K)


class PartitionOfUnityCheck(SmoothingCheck):
    per_delta = False

    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        js = self.parser.get_int_list("js", app_state.config.grid_j)
        return [check_partition_of_unity(js, app_state.rng_for(self.index), self.sampling(app_state, "pairs"))]


class GridLeafExactnessCheck(SmoothingCheck):
    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        return [
            check_grid_leaf_exactness(
                self.smoother(app_state), self.K, app_state.rng_for(self.index), self.sampling(app_state, "samples")
            )
        ]


class PlateauCheck(SmoothingCheck):
    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        return [
            check_plateau(self.smoother(app_state), self.K, app_state.rng_for(self.index), self.sampling(app_state, "samples"))
        ]


class HMonotoneCheck(SmoothingCheck):
    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        return [check_h_monotone(self.smoother(app_state), self.K, self.sampling(app_state, "grid"))]


class HSupErrorCheck(SmoothingCheck):
    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        return [check_h_sup_error(self.smoother(app_state), self.K, self.sampling(app_state, "grid"))]


class HLeafwiseDerivativeCheck(SmoothingCheck):
    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        return [check_h_derivative(self.smoother(app_state), self.L(app_state), self.K, self.sampling(app_state, "grid"))]


class HConvergenceCheck(SmoothingCheck):
    """sup |h_delta - pi| and sup |dh_delta/dx| must both drop strictly from the previous delta."""

    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        n = self.sampling(app_state, "grid")
        err, deriv = measure_h_errors(self.smoother(app_state), self.K, n)
        previous = previous_delta(app_state, self.delta)
        prev_err = prev_deriv = None
        if previous is not None:
            prev_err, prev_deriv = measure_h_errors(self.smoother(app_state, previous), self.K, n)
        params = {"family": self.entry.name, "delta": self.delta, "previous_delta": previous}
        return [
            convergence_report("h-convergence", err, prev_err, self.suite, params, role="c0"),
            convergence_report("h-convergence", deriv, prev_deriv, self.suite, params, role="c1"),
        ]


class Lemma2Check(SmoothingCheck):
    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        return [check_lemma2(self.entry.family, self.delta, self.L(app_state), self.K)]


class Theorem1Check(SmoothingCheck):
    """sup |psi - phi| and the leafwise derivative error of the composite approximant against epsilon."""

    uses_grid_j = True

    def __init__(self, parser: CheckParser):
        super().__init__(parser)
        self.phi_name: str = parser.get_arg("phi", "pi")
        self.epsilon: Optional[float] = parser.get_float("epsilon", lo=0.0)

    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        epsilon = float(self.epsilon if self.epsilon is not None else app_state.config.epsilon)
        phi = self.test_function(self.phi_name)
        return report_theorem1(
            phi,
            self.entry.family,
            self.K,
            epsilon,
            self.delta,
            self.grid_j,
            CutoffChi(app_state.config.chi),
            self.sampling(app_state, "grid"),
        )
