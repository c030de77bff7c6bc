from __future__ import annotations
from typing import Callable, Optional

import numpy as np

from lamination.family import LeafFamily, ScalarLeafFamily
from lamination.projection import project_pi
from report.bound_report import BoundReport, SAMPLED_SUP_NOTE
from util.errors import DomainError
from util.numerics import fd_step, richardson_derivative
from util.types import ArrayLike, FloatArray

type PointFunction = Callable[..., FloatArray]


class PartialSmoothFunction:
    """
    A member of the class A: continuous, C^1 along every leaf, with continuous
    leafwise derivative(s). Derivatives may be given analytically; otherwise they
    are measured by finite differences along the leaf.
    """

    def __init__(
        self,
        name: str,
        evaluator: PointFunction,
        derivative: Optional[PointFunction] = None,
        derivative_y: Optional[PointFunction] = None,
    ):
        """
        Creates a PartialSmoothFunction.

        Args:
            name (str): Label used in reports.
            evaluator (PointFunction): phi(point).
            derivative (Optional[PointFunction]): Phi(point), the leafwise x-derivative.
            derivative_y (Optional[PointFunction]): Psi(point), the leafwise
                y-derivative on surfaces.
        """
        self.name = name
        self._evaluator = evaluator
        self.derivative = derivative
        self.derivative_y = derivative_y

    def __str__(self):
        return f"PartialSmoothFunction.{self.name}"

    def __call__(self, *point: ArrayLike) -> FloatArray:
        arrays = np.broadcast_arrays(*[np.asarray(p, dtype=float) for p in point])
        return np.asarray(self._evaluator(*arrays), dtype=float) + np.zeros(arrays[0].shape)


def coordinate_function(axis: int, label: str) -> PartialSmoothFunction:
    """phi(point) = point[axis]; the base coordinate x has leafwise derivatives (1, 0)."""
    if axis == 0:
        return PartialSmoothFunction(
            label,
            lambda *p: p[0],
            derivative=lambda *p: np.ones(np.shape(p[0])),
            derivative_y=lambda *p: np.zeros(np.shape(p[0])),
        )
    return PartialSmoothFunction(label, lambda *p: p[axis])


def projection_function(family: LeafFamily) -> PartialSmoothFunction:
    """phi = pi, constant on every leaf."""
    return PartialSmoothFunction(
        "pi",
        lambda *p: project_pi(family, *p),
        derivative=lambda *p: np.zeros(np.shape(p[0])),
        derivative_y=lambda *p: np.zeros(np.shape(p[0])),
    )


def named_function(name: str, family: LeafFamily) -> PartialSmoothFunction:
    """
    The test functions used by the harness: "x", "y", "z" and "pi".

    "y" is the transversal coordinate in R^2 and "z" the transversal coordinate
    of a surface lamination.
    """
    match name:
        case "x":
            return coordinate_function(0, "x")
        case "y" | "z":
            return coordinate_function(family.base_dim, name)
        case "pi":
            return projection_function(family)
    raise ValueError(f"{family}: unknown test function {name}")


def leafwise_derivative(
    phi: PartialSmoothFunction | PointFunction,
    family: ScalarLeafFamily,
    a: ArrayLike,
    *base: ArrayLike,
    h: Optional[float] = None,
) -> FloatArray | tuple[FloatArray, FloatArray]:
    """
    d/dx phi(x, f_a(x)) along the single leaf with parameter a, by central
    differences with one Richardson level. On surfaces both leafwise partials
    (d/dx, d/dy) are returned.

    Args:
        phi (PartialSmoothFunction | PointFunction): Function of the point.
        family (ScalarLeafFamily): The lamination.
        a (ArrayLike): Leaf parameter(s).
        *base (ArrayLike): Base point(s) x0, or (x0, y0) on surfaces.
        h (Optional[float]): Step; 1e-5 of the base width by default.
    Returns:
        derivative (FloatArray | tuple[FloatArray, FloatArray]): One value per point
            (a pair of arrays on surfaces).
    """
    base = [np.asarray(b, dtype=float) for b in base]
    partials = []
    for axis in range(family.base_dim):
        step = h if h is not None else fd_step(family.domain.width(axis))
        lo, hi = family.domain.interval(axis)
        if np.any(base[axis] - step < lo) or np.any(base[axis] + step > hi):
            raise DomainError(f"{family}: finite-difference stencil leaves the domain")

        def along_leaf(t, axis=axis):
            moved = list(base)
            moved[axis] = t
            return phi(*moved, family.evaluate(a, *moved, strict=False))

        partials.append(richardson_derivative(along_leaf, base[axis], step))
    if family.base_dim == 1:
        return partials[0]
    return partials[0], partials[1]


def check_leafwise_derivative(
    phi: PartialSmoothFunction,
    family: ScalarLeafFamily,
    rng: np.random.Generator,
    samples: int = 1000,
    tol: float = 1e-6,
) -> BoundReport:
    """
    Compares the analytic leafwise derivative Phi with finite differences along leaves.

    Args:
        phi (PartialSmoothFunction): Must carry an analytic derivative.
        tol (float): Allowed discrepancy; finite differences at step 1e-5 resolve ~1e-8.
    """
    if phi.derivative is None:
        raise ValueError(f"{phi}: no analytic leafwise derivative to compare")
    inner = family.domain.interior()
    base = [rng.uniform(*inner.interval(axis), samples) for axis in range(family.base_dim)]
    a = rng.uniform(*family.param_range, samples)
    point = base + [family.evaluate(a, *base)]
    measured = leafwise_derivative(phi, family, a, *base)
    if family.base_dim == 1:
        err = np.abs(measured - phi.derivative(*point))
    else:
        err = np.maximum(
            np.abs(measured[0] - phi.derivative(*point)),
            np.abs(measured[1] - phi.derivative_y(*point)),
        )
    return BoundReport.from_pointwise(
        "leafwise-derivative",
        err,
        tol,
        suite="assumption",
        params={"family": family.name},
        grid=f"{samples} random (a, base)",
        notes=[SAMPLED_SUP_NOTE, f"phi={phi.name}"],
    )
