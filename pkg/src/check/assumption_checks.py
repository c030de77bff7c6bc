from typing import override

from check.base_check import Check
from check.check_parser import CheckParser
from lamination.log_lipschitz import (
    check_basic_assumption,
    check_lemma1,
    check_monotone_ordering,
    check_ode_oracle,
    check_projection_roundtrip,
)
from lamination.ode import Rk4Integrator
from lamination.partial_function import check_leafwise_derivative
from lamination.slope_field import check_slope_consistency
from manager.family_manager import CURVE2D, CURVE3D, SURFACE
from report.bound_report import BoundReport
from state import AppState
from util.errors import DomainError


def integrator_from(app_state: AppState) -> Rk4Integrator:
    return app_state.config.integrator()


class AssumptionCheck(Check):
    """Checks on the lamination itself; they do not depend on delta or J."""

    suite = "assumption"
    per_delta = False

    def _tag(self, reports: list[BoundReport]) -> list[BoundReport]:
        for report in reports:
            report.params.setdefault("family", self.entry.name)
        return reports


class BasicAssumptionCheck(AssumptionCheck):
    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        source = self.entry.field if self.entry.field is not None else self.entry.family
        report = check_basic_assumption(
            source,
            self.entry.domain,
            self.L(app_state),
            app_state.rng_for(self.index),
            self.sampling(app_state, "pairs"),
        )
        return self._tag([report])


class Lemma1Check(AssumptionCheck):
    kinds = (CURVE2D,)

    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        return self._tag(
            check_lemma1(
                self.entry.family,
                self.L(app_state),
                app_state.rng_for(self.index),
                self.sampling(app_state, "pairs"),
                delta_max=self.parser.get_float("delta_max", 0.25, lo=0.0),
            )
        )


class MonotoneOrderingCheck(AssumptionCheck):
    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        return self._tag(
            [check_monotone_ordering(self.entry.family, app_state.rng_for(self.index), self.sampling(app_state, "samples"))]
        )


class ProjectionRoundtripCheck(AssumptionCheck):
    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        return self._tag(
            [
                check_projection_roundtrip(
                    self.entry.family,
                    app_state.rng_for(self.index),
                    self.sampling(app_state, "samples"),
                    tol=self.parser.get_float("tol", 1e-9, lo=0.0),
                )
            ]
        )


class SlopeConsistencyCheck(AssumptionCheck):
    kinds = (CURVE2D, CURVE3D)

    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        if self.entry.field is None:
            raise DomainError(f"{self}: {self.entry.name} has no slope field")
        return self._tag(
            [
                check_slope_consistency(
                    self.entry.field,
                    self.entry.family,
                    app_state.rng_for(self.index),
                    self.sampling(app_state, "samples"),
                    tol=self.parser.get_float("tol", 1e-9, lo=0.0),
                )
            ]
        )


class OdeOracleCheck(AssumptionCheck):
    """Integrated leaves of the slope field against the closed-form family."""

    kinds = (CURVE2D, CURVE3D)

    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        if self.entry.field is None:
            raise DomainError(f"{self}: {self.entry.name} has no slope field")
        return self._tag(
            [
                check_ode_oracle(
                    self.entry.field,
                    self.entry.family,
                    integrator_from(app_state),
                    leaves=self.sampling(app_state, "leaves"),
                    x_max=self.parser.get_float("x_max", 2.0, lo=0.0),
                    tol=self.parser.get_float("tol", 1e-8, lo=0.0),
                )
            ]
        )


class LeafwiseDerivativeCheck(AssumptionCheck):
    kinds = (CURVE2D, SURFACE)

    def __init__(self, parser: CheckParser):
        super().__init__(parser)
        self.phi_name: str = parser.get_arg("phi", "x")

    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        phi = self.test_function(self.phi_name)
        return self._tag(
            [
                check_leafwise_derivative(
                    phi,
                    self.entry.family,
                    app_state.rng_for(self.index),
                    self.sampling(app_state, "samples"),
                    tol=self.parser.get_float("tol", 1e-6, lo=0.0),
                )
            ]
        )
