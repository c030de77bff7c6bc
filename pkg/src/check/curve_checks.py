from __future__ import annotations
from typing import Optional, override

import numpy as np

from check.assumption_checks import integrator_from
from check.base_check import Check
from check.smooth2d_checks import previous_delta
from flow.estimates import (
    SUITE,
    check_corollary1,
    check_grad_pi_and_final,
    check_leaf_separation,
    check_lemma5,
    check_pi_delta_roundtrip,
    measure_final,
    pi_delta_error,
)
from flow.projection import SmoothProjection, select_radius
from flow.smoothed_field import SmoothedField, build_F_delta, check_blend_weights, check_lemma3
from lamination.domain import Domain
from manager.family_manager import CURVE3D
from report.bound_report import BoundReport
from smoothing.estimates import convergence_report
from state import AppState
from util.errors import DomainError

# Smallest L for which the comparison window log 2 / (2L) is usable
MIN_COMPARISON_L = 1.45


class CurveCheck(Check):
    """Checks on the mollified field F_delta and the projection pi_delta it induces."""

    suite = SUITE
    kinds = (CURVE3D,)

    def L_effective(self, app_state: AppState) -> float:
        return max(self.L(app_state), MIN_COMPARISON_L)

    def field(self, app_state: AppState, delta: Optional[float] = None) -> SmoothedField:
        delta = delta if delta is not None else self.delta
        entry = self.entry
        if entry.field is None:
            raise DomainError(f"{self}: {entry.name} has no slope field")
        key = f"F:{entry.name}:{delta!r}"
        config = app_state.config

        def build():
            return build_F_delta(
                entry.field,
                delta,
                entry.domain,
                self.L_effective(app_state),
                app_state.rng_for_key(key),
                delta0=config.delta0,
                probes=config.sampling["probes"],
                quadrature=config.sampling["quadrature"],
                strand_samples=config.sampling["strand_samples"],
            )

        return app_state.cached(key, build)

    def projection(self, app_state: AppState, delta: Optional[float] = None) -> SmoothProjection:
        delta = delta if delta is not None else self.delta
        return app_state.cached(
            f"pi:{self.entry.name}:{delta!r}",
            lambda: SmoothProjection(self.field(app_state, delta), integrator_from(app_state)),
        )

    def disk(self, app_state: AppState, delta: Optional[float] = None) -> Domain:
        delta = delta if delta is not None else self.delta
        return app_state.cached(
            f"disk:{self.entry.name}:{delta!r}",
            lambda: select_radius(self.projection(app_state, delta), center=app_state.config.center),
        )

    def params(self, **extra) -> dict:
        return {"family": self.entry.name, "delta": self.delta, **extra}


class Lemma3Check(CurveCheck):
    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        return check_lemma3(self.field(app_state), self.sampling(app_state, "sup_grid"))


class BlendWeightsCheck(CurveCheck):
    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        return [
            check_blend_weights(
                self.delta, app_state.rng_for(self.index), self.sampling(app_state, "pairs"), box=self.entry.domain
            )
        ]


class PiDeltaRoundtripCheck(CurveCheck):
    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        return [
            check_pi_delta_roundtrip(
                self.projection(app_state),
                self.disk(app_state),
                app_state.rng_for(self.index),
                self.sampling(app_state, "samples"),
            )
        ]


class Lemma5Check(CurveCheck):
    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        return [
            check_lemma5(
                self.field(app_state),
                self.entry.family,
                self.L_effective(app_state),
                app_state.rng_for(self.index),
                leaves=self.sampling(app_state, "leaves"),
                stations=self.sampling(app_state, "stations"),
                integrator=integrator_from(app_state),
            )
        ]


class Corollary1Check(CurveCheck):
    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        return [
            check_corollary1(
                self.field(app_state),
                self.entry.family,
                self.parser.get_float("tau", app_state.config.tau, lo=0.0, hi=1.0),
                self.L_effective(app_state),
                app_state.rng_for(self.index),
                leaves=self.sampling(app_state, "leaves"),
                stations=self.sampling(app_state, "stations"),
                integrator=integrator_from(app_state),
            )
        ]


class LeafSeparationCheck(CurveCheck):
    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        return check_leaf_separation(
            self.field(app_state),
            app_state.rng_for(self.index),
            pairs=self.sampling(app_state, "leaf_pairs"),
            spacing=self.parser.get_float("spacing", 1e-4, lo=0.0),
            integrator=integrator_from(app_state),
        )


class GradPiFinalCheck(CurveCheck):
    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        return check_grad_pi_and_final(
            self.projection(app_state),
            self.entry.family,
            self.disk(app_state),
            self.sampling(app_state, "disk_grid"),
        )


class CurveConvergenceCheck(CurveCheck):
    """
    A measured quantity at this delta against the same quantity at the previous
    delta. Both are measured on the same region and the same sampled leaves.
    """

    check_name = ""

    def measure(self, app_state: AppState, delta: float, region: Domain) -> float:
        raise NotImplementedError("Convergence measure wasn't implemented")

    def region(self, app_state: AppState, previous: Optional[float]) -> Domain:
        """The smaller of the two disks D_R."""
        disk = self.disk(app_state)
        if previous is None:
            return disk
        other = self.disk(app_state, previous)
        return other if other.width(0) < disk.width(0) else disk

    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        previous = previous_delta(app_state, self.delta)
        region = self.region(app_state, previous)
        current = self.measure(app_state, self.delta, region)
        before = self.measure(app_state, previous, region) if previous is not None else None
        return [
            convergence_report(
                self.check_name, current, before, self.suite, self.params(previous_delta=previous, R=region.radius)
            )
        ]


class PiDeltaConvergenceCheck(CurveConvergenceCheck):
    check_name = "pi-delta-convergence"

    @override
    def measure(self, app_state: AppState, delta: float, region: Domain) -> float:
        return pi_delta_error(self.projection(app_state, delta), self.entry.family, region, self.sampling(app_state, "disk_grid"))


class Corollary1ConvergenceCheck(CurveConvergenceCheck):
    check_name = "corollary1-convergence"

    @override
    def measure(self, app_state: AppState, delta: float, region: Domain) -> float:
        # Same leaves at every delta
        rng = app_state.rng_for_key(f"{self.check_name}:{self.entry.name}")
        report = check_corollary1(
            self.field(app_state, delta),
            self.entry.family,
            self.parser.get_float("tau", app_state.config.tau, lo=0.0, hi=1.0),
            self.L_effective(app_state),
            rng,
            leaves=self.sampling(app_state, "leaves"),
            stations=self.sampling(app_state, "stations"),
            integrator=integrator_from(app_state),
        )
        return report.measured


class FinalBoundConvergenceCheck(CurveConvergenceCheck):
    check_name = "final-bound-convergence"

    @override
    def measure(self, app_state: AppState, delta: float, region: Domain) -> float:
        _, deriv = measure_final(
            self.projection(app_state, delta), self.entry.family, region, self.sampling(app_state, "disk_grid")
        )
        return float(np.max(deriv))
