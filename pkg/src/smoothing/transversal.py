from __future__ import annotations
import logging
from typing import Optional

import numpy as np

from lamination.family import LeafFamily2D, ScalarLeafFamily, SurfaceFamily3D
from lamination.partial_function import leafwise_derivative
from lamination.projection import project_pi
from smoothing.cutoff import CutoffChi
from util.errors import DomainError, MonotonicityError
from util.types import ArrayLike, FloatArray, Interval

logger = logging.getLogger(__name__)


class TransversalSmoother:
    """
    The C^1 staircase h_delta approximating pi.

    Between the grid leaves a = j delta and (j + 1) delta it blends the two grid
    values with the cutoff chi of the relative height
    u = (y - f_{j delta}) / (f_{(j+1) delta} - f_{j delta}), so h_delta equals
    j delta exactly on the grid leaf and stays constant wherever u < 1/4 or u > 3/4.
    """

    def __init__(
        self,
        family: ScalarLeafFamily,
        delta: float,
        chi: CutoffChi,
        span: Optional[Interval] = None,
    ):
        """
        Creates a TransversalSmoother.

        Args:
            family (ScalarLeafFamily): Ordered family of curves or surfaces.
            delta (float): Grid spacing in the parameter a.
            chi (CutoffChi): Cutoff.
            span (Optional[Interval]): Parameters that must be covered; the grid
                reaches one cell past each end, never below the family's range.
        """
        if delta <= 0:
            raise DomainError(f"{family}: delta must be positive, got {delta}")
        self.family = family
        self.delta = float(delta)
        self.chi = chi
        lo, hi = span if span is not None else family.param_range
        range_lo, range_hi = family.param_range
        self.j_lo = max(int(np.floor(lo / delta)) - 1, int(np.ceil(range_lo / delta - 1e-9)))
        self.j_hi = min(int(np.ceil(hi / delta)) + 1, int(np.floor(range_hi / delta + 1e-9)) + 1)
        if self.j_hi <= self.j_lo:
            raise DomainError(f"{self}: parameter span {lo:g}..{hi:g} holds no grid cell")
        logger.info(f"{self}: grid j in [{self.j_lo}, {self.j_hi}], {chi}", extra={"smoother": self.to_dict()})

    def __str__(self):
        return f"TransversalSmoother.{self.family.name}{{delta={self.delta:g}}}"

    def grid_value(self, j: ArrayLike) -> FloatArray:
        return np.asarray(j, dtype=float) * self.delta

    def grid_leaf(self, j: ArrayLike, *base: ArrayLike) -> FloatArray:
        return self.family.evaluate(self.grid_value(j), *base, strict=False)

    def relative_height(self, *point: ArrayLike) -> tuple[FloatArray, FloatArray]:
        """
        Grid cell and relative height of each point.

        Returns:
            j, u: Cell index with j delta <= pi(point) <= (j + 1) delta, and u in [0, 1].
        """
        arrays = np.broadcast_arrays(*[np.asarray(p, dtype=float) for p in point])
        base, y = arrays[:-1], arrays[-1]
        a = project_pi(self.family, *arrays)
        j = np.clip(np.floor(a / self.delta), self.j_lo, self.j_hi - 1)

        lower = self.grid_leaf(j, *base)
        upper = self.grid_leaf(j + 1, *base)
        # pi is only accurate to the projection tolerance; settle the cell against the leaves
        down = (y < lower) & (j > self.j_lo)
        up = (y > upper) & (j + 1 < self.j_hi)
        if np.any(down | up):
            j = j - down.astype(float) + up.astype(float)
            lower = self.grid_leaf(j, *base)
            upper = self.grid_leaf(j + 1, *base)

        gap = upper - lower
        if np.any(gap <= 0):
            raise MonotonicityError(
                f"{self}: non-positive gap between grid leaves at {np.count_nonzero(gap <= 0)} point(s)"
            )
        u = np.clip((y - lower) / gap, 0.0, 1.0)
        return j, u

    def __call__(self, *point: ArrayLike) -> FloatArray:
        j, u = self.relative_height(*point)
        weight = self.chi(u)
        return self.grid_value(j) * weight + self.grid_value(j + 1) * (1.0 - weight)

    def leafwise_derivative(self, b: ArrayLike, *base: ArrayLike, h: Optional[float] = None):
        """Finite-difference derivative of h_delta along the leaf Gamma_b."""
        return leafwise_derivative(self, self.family, b, *base, h=h)

    def to_dict(self):
        return {
            "family": self.family.name,
            "delta": self.delta,
            "chi": self.chi.to_dict(),
            "j_range": [self.j_lo, self.j_hi],
        }


class TransversalSmoother2D(TransversalSmoother):
    """h_delta(x, y) for a lamination of R^2 by graphs."""

    def __init__(self, family: LeafFamily2D, delta: float, chi: CutoffChi, span: Optional[Interval] = None):
        if family.base_dim != 1:
            raise ValueError(f"{family}: expected a family of curves over x")
        super().__init__(family, delta, chi, span)


class TransversalSmoother3DS(TransversalSmoother):
    """h_delta(x, y, z) for a lamination of R^3 by graph surfaces."""

    def __init__(self, family: SurfaceFamily3D, delta: float, chi: CutoffChi, span: Optional[Interval] = None):
        if family.base_dim != 2:
            raise ValueError(f"{family}: expected a family of surfaces over (x, y)")
        super().__init__(family, delta, chi, span)


def build_h_delta(
    family: LeafFamily2D, delta: float, chi: CutoffChi, span: Optional[Interval] = None
) -> TransversalSmoother2D:
    return TransversalSmoother2D(family, delta, chi, span)


def build_h_delta_surface(
    family: SurfaceFamily3D, delta: float, chi: CutoffChi, span: Optional[Interval] = None
) -> TransversalSmoother3DS:
    return TransversalSmoother3DS(family, delta, chi, span)


def eval_h_leafwise_deriv(smoother: TransversalSmoother, b: ArrayLike, *base: ArrayLike, h: Optional[float] = None):
    """
    d/dx h_delta(x, f_b(x)) at the base point(s); a (d/dx, d/dy) pair on surfaces.

    Exactly zero when the relative height stays in the plateau [0, 1/4] or
    [3/4, 1] across the stencil.
    """
    return smoother.leafwise_derivative(b, *base, h=h)


def parameter_span(family: ScalarLeafFamily, K_coords: tuple[FloatArray, ...]) -> Interval:
    """Range of pi over the given sample points of a compact set K."""
    a = project_pi(family, *K_coords)
    return float(np.min(a)), float(np.max(a))
