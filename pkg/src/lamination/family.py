from __future__ import annotations
from abc import ABC
from typing import Callable, Optional

import numpy as np

from lamination.domain import Domain
from util.errors import DomainError
from util.types import ArrayLike, FloatArray, Interval

type LeafEvaluator = Callable[..., FloatArray]

# Parameters may sit this far outside the declared range before strict checks fail
PARAM_TOL = 1e-12


class LeafFamily(ABC):
    """
    A parameterized family a -> f_a of disjoint graphs over the base coordinates.

    Subclasses fix the base dimension (1 for curves over x, 2 for surfaces over
    (x, y)) and the parameter dimension (1, or 2 for curves in R^3).
    """

    base_dim: int = 1
    param_dim: int = 1

    def __init__(self, name: str, domain: Domain, provenance: str = "closed-form"):
        """
        Args:
            name (str): Catalog identifier.
            domain (Domain): Box the family is evaluated on.
            provenance (str): "closed-form" or "ode".
        """
        self.name = name
        self.domain = domain
        self.provenance = provenance

    def __str__(self):
        return f"Family.{self.name}"

    def require_base(self, *base: ArrayLike):
        for axis, value in enumerate(base):
            lo, hi = self.domain.interval(axis)
            value = np.asarray(value)
            if np.any((value < lo - PARAM_TOL) | (value > hi + PARAM_TOL)):
                raise DomainError(
                    f"{self}: base coordinate {self.domain.axis_name(axis)} outside [{lo:g}, {hi:g}]"
                )

    def log_extra(self):
        return {"family": self.name, "provenance": self.provenance}


class ScalarLeafFamily(LeafFamily):
    """A family with a real parameter a, ordered so a < a' implies f_a < f_a'."""

    def __init__(
        self,
        name: str,
        domain: Domain,
        param_range: Interval,
        evaluator: LeafEvaluator,
        inverse: Optional[LeafEvaluator] = None,
        provenance: str = "closed-form",
    ):
        super().__init__(name, domain, provenance)
        self.param_range: Interval = (float(param_range[0]), float(param_range[1]))
        self._evaluator = evaluator
        self._inverse = inverse

    def require_param(self, a: ArrayLike):
        lo, hi = self.param_range
        a = np.asarray(a)
        if np.any((a < lo - PARAM_TOL) | (a > hi + PARAM_TOL)):
            raise DomainError(f"{self}: parameter outside [{lo:g}, {hi:g}]")

    def evaluate(self, a: ArrayLike, *base: ArrayLike, strict: bool = True) -> FloatArray:
        """
        Height f_a(base) of the leaf with parameter a.

        Args:
            a (ArrayLike): Leaf parameter(s).
            *base (ArrayLike): Base coordinates, broadcastable with a.
            strict (bool): Reject parameters and bases outside the family's box.
                The smoothers read one grid cell past the range with strict=False.
        """
        if strict:
            self.require_param(a)
            self.require_base(*base)
        return np.asarray(self._evaluator(np.asarray(a, dtype=float), *base), dtype=float)

    @property
    def has_inverse(self) -> bool:
        return self._inverse is not None

    def inverse(self, *point: ArrayLike) -> FloatArray:
        """Analytic projection pi(point); callers check coverage."""
        if self._inverse is None:
            raise NotImplementedError(f"{self}: no analytic inverse")
        return np.asarray(self._inverse(*point), dtype=float)

    def param_span(self, *point: ArrayLike) -> tuple[FloatArray, FloatArray]:
        """Heights of the lowest and highest leaves above the base of `point`."""
        base = point[:-1]
        lo, hi = self.param_range
        return self.evaluate(lo, *base, strict=False), self.evaluate(hi, *base, strict=False)


class LeafFamily2D(ScalarLeafFamily):
    """Curves y = f_a(x) in R^2, normalized so f_a(0) = a."""

    base_dim = 1

    def __init__(
        self,
        name: str,
        domain: Domain,
        param_range: Interval,
        evaluator: LeafEvaluator,
        slope: LeafEvaluator,
        inverse: Optional[LeafEvaluator] = None,
        provenance: str = "closed-form",
    ):
        """
        Creates a LeafFamily2D.

        Args:
            evaluator (LeafEvaluator): (a, x) -> f_a(x).
            slope (LeafEvaluator): (a, x) -> f_a'(x).
            inverse (Optional[LeafEvaluator]): (x, y) -> pi(x, y) when known in closed form.
        """
        super().__init__(name, domain, param_range, evaluator, inverse, provenance)
        self._slope = slope

    def slope(self, a: ArrayLike, x: ArrayLike) -> FloatArray:
        return np.asarray(self._slope(np.asarray(a, dtype=float), x), dtype=float)


class SurfaceFamily3D(ScalarLeafFamily):
    """Surfaces z = f_a(x, y) in R^3."""

    base_dim = 2

    def __init__(
        self,
        name: str,
        domain: Domain,
        param_range: Interval,
        evaluator: LeafEvaluator,
        slope_x: LeafEvaluator,
        slope_y: LeafEvaluator,
        inverse: Optional[LeafEvaluator] = None,
    ):
        """
        Creates a SurfaceFamily3D.

        Args:
            evaluator (LeafEvaluator): (a, x, y) -> f_a(x, y).
            slope_x (LeafEvaluator): (a, x, y) -> df_a/dx.
            slope_y (LeafEvaluator): (a, x, y) -> df_a/dy.
            inverse (Optional[LeafEvaluator]): (x, y, z) -> pi(x, y, z).
        """
        super().__init__(name, domain, param_range, evaluator, inverse)
        self._slope_x = slope_x
        self._slope_y = slope_y

    def slopes(self, a: ArrayLike, x: ArrayLike, y: ArrayLike) -> tuple[FloatArray, FloatArray]:
        a = np.asarray(a, dtype=float)
        return (
            np.asarray(self._slope_x(a, x, y), dtype=float),
            np.asarray(self._slope_y(a, x, y), dtype=float),
        )


class CurveFamily3D(LeafFamily):
    """
    Curves y = f_a(x) in R^3 with a pair parameter a = (a1, a2) and f_a(0) = a.

    Values are stacked along a trailing axis of length 2.
    """

    base_dim = 1
    param_dim = 2

    def __init__(
        self,
        name: str,
        domain: Domain,
        param_box: tuple[Interval, Interval],
        evaluator: LeafEvaluator,
        slope: LeafEvaluator,
        inverse: Optional[LeafEvaluator] = None,
        provenance: str = "closed-form",
    ):
        """
        Creates a CurveFamily3D.

        Args:
            evaluator (LeafEvaluator): (a1, a2, x) -> (..., 2) leaf values.
            slope (LeafEvaluator): (a1, a2, x) -> (..., 2) tangents df_a/dx.
            inverse (Optional[LeafEvaluator]): (x, y1, y2) -> (..., 2) parameters.
        """
        super().__init__(name, domain, provenance)
        self.param_box = tuple((float(lo), float(hi)) for lo, hi in param_box)
        self._evaluator = evaluator
        self._slope = slope
        self._inverse = inverse

    def require_param(self, a1: ArrayLike, a2: ArrayLike):
        for value, (lo, hi) in zip((a1, a2), self.param_box):
            value = np.asarray(value)
            if np.any((value < lo - PARAM_TOL) | (value > hi + PARAM_TOL)):
                raise DomainError(f"{self}: parameter outside [{lo:g}, {hi:g}]")

    def evaluate(
        self, a1: ArrayLike, a2: ArrayLike, x: ArrayLike, strict: bool = True
    ) -> FloatArray:
        if strict:
            self.require_param(a1, a2)
            self.require_base(x)
        return np.asarray(self._evaluator(np.asarray(a1, dtype=float), np.asarray(a2, dtype=float), x), dtype=float)

    def slope(self, a1: ArrayLike, a2: ArrayLike, x: ArrayLike) -> FloatArray:
        return np.asarray(self._slope(np.asarray(a1, dtype=float), np.asarray(a2, dtype=float), x), dtype=float)

    @property
    def has_inverse(self) -> bool:
        return self._inverse is not None

    def inverse(self, x: ArrayLike, y1: ArrayLike, y2: ArrayLike) -> FloatArray:
        if self._inverse is None:
            raise NotImplementedError(f"{self}: no analytic inverse")
        return np.asarray(self._inverse(x, y1, y2), dtype=float)


def leaf_eval(family: LeafFamily, a, *base: ArrayLike) -> FloatArray:
    """
    Evaluates the leaf with parameter `a` over `base`.

    Args:
        family (LeafFamily): Any family of the catalog.
        a: Scalar parameter, or an (a1, a2) pair for curves in R^3.
        *base (ArrayLike): Base coordinates.
    Returns:
        values (FloatArray): f_a(base), shaped (..., 2) for curves in R^3.
    """
    if isinstance(family, CurveFamily3D):
        a1, a2 = a
        return family.evaluate(a1, a2, *base)
    return family.evaluate(a, *base)
