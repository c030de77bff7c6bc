from typing import Optional, override

from check.check_parser import CheckParser
from check.smooth2d_checks import SmoothingCheck
from manager.family_manager import SURFACE
from report.bound_report import BoundReport
from smoothing.cutoff import CutoffChi
from smoothing.estimates import (
    check_grid_leaf_exactness,
    check_plateau,
    check_prop2_bounds,
    check_surface_consistency,
    report_theorem2,
)
from smoothing.transversal import TransversalSmoother, parameter_span
from state import AppState
from util.errors import DomainError


class SurfaceCheck(SmoothingCheck):
    """Checks on h_delta and psi for laminations of R^3 by graph surfaces."""

    suite = "surface"
    kinds = (SURFACE,)


class SurfaceGridLeafExactnessCheck(SurfaceCheck):
    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        return [
            check_grid_leaf_exactness(
                self.smoother(app_state), self.K, app_state.rng_for(self.index), self.sampling(app_state, "samples")
            )
        ]


class SurfacePlateauCheck(SurfaceCheck):
    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        return [
            check_plateau(self.smoother(app_state), self.K, app_state.rng_for(self.index), self.sampling(app_state, "samples"))
        ]


class Prop2Check(SurfaceCheck):
    def __init__(self, parser: CheckParser):
        super().__init__(parser)
        self.radial_factor = parser.get_float("radial_factor", 1.5, lo=0.0)

    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        return check_prop2_bounds(
            self.smoother(app_state),
            self.L(app_state),
            self.K,
            self.sampling(app_state, "surface_grid"),
            radial_factor=self.radial_factor,
        )


class Theorem2Check(SurfaceCheck):
    uses_grid_j = True

    def __init__(self, parser: CheckParser):
        super().__init__(parser)
        self.phi_name: str = parser.get_arg("phi", "pi")
        self.epsilon: Optional[float] = parser.get_float("epsilon", lo=0.0)

    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        epsilon = float(self.epsilon if self.epsilon is not None else app_state.config.epsilon)
        return report_theorem2(
            self.test_function(self.phi_name),
            self.entry.family,
            self.K,
            epsilon,
            self.delta,
            self.grid_j,
            CutoffChi(app_state.config.chi),
            self.sampling(app_state, "surface_grid"),
        )


class SurfaceConsistencyCheck(SurfaceCheck):
    """
    A surface family that does not depend on y must smooth exactly like its
    planar counterpart. The planar smoother reuses the surface parameter span so
    both share one grid.
    """

    @override
    def run(self, app_state: AppState) -> list[BoundReport]:
        if self.entry.planar is None:
            raise DomainError(f"{self}: {self.entry.name} has no planar counterpart")
        planar = app_state.family_manager.get_by_name(self.entry.planar)
        surface_smoother = self.smoother(app_state)

        def build():
            span = parameter_span(self.entry.family, self.K.grid(8))
            return TransversalSmoother(planar.family, self.delta, CutoffChi(app_state.config.chi), span)

        planar_smoother = app_state.cached(f"h-planar:{planar.name}:{self.delta!r}:{self.K}", build)
        return [
            check_surface_consistency(
                surface_smoother,
                planar_smoother,
                self.K,
                self.sampling(app_state, "surface_grid"),
                tol=self.parser.get_float("tol", 1e-12, lo=0.0),
            )
        ]

