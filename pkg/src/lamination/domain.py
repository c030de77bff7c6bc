from __future__ import annotations
from typing import Any, Optional, Sequence

import numpy as np

from util.errors import DomainError
from util.types import FloatArray, Interval

AXIS_NAMES = {
    2: ("x", "y"),
    3: ("x", "y1", "y2"),
}

# Surfaces in R^3 are graphs over (x, y) with transversal z
SURFACE_AXES = ("x", "y", "z")


class Domain:
    """
    A compact box in R^2 or R^3. Axis 0 is always the base coordinate x;
    the remaining axes are transversal (y) or, for surfaces, (y, z).
    """

    def __init__(
        self,
        bounds: Sequence[Interval],
        radius: Optional[float] = None,
        center: Optional[Sequence[float]] = None,
        labels: Optional[Sequence[str]] = None,
    ):
        """
        Creates a Domain.

        Args:
            bounds (Sequence[Interval]): Closed interval per axis.
            labels (Optional[Sequence[str]]): Axis names, ("x", "y", "z") for surfaces.
            radius (Optional[float]): Radius R when the box is a polydisk D_R.
            center (Optional[Sequence[float]]): Transversal centre of D_R.
        """
        if len(bounds) not in AXIS_NAMES:
            raise DomainError(f"Domain: dimension must be 2 or 3, got {len(bounds)}")
        self.bounds: tuple[Interval, ...] = tuple(
            (float(lo), float(hi)) for lo, hi in bounds
        )
        self.labels = tuple(labels) if labels is not None else AXIS_NAMES[len(bounds)]
        for axis, (lo, hi) in enumerate(self.bounds):
            if not lo < hi:
                raise DomainError(
                    f"{self}: interval for axis {self.axis_name(axis)} is empty: [{lo}, {hi}]"
                )
        self.radius = radius
        self.center = tuple(center) if center is not None else None

    @classmethod
    def polydisk(cls, radius: float, center: Sequence[float]) -> Domain:
        """
        The polydisk D_R = {|x| <= R, |y_i - c_i| <= R}.

        Args:
            radius (float): R > 0.
            center (Sequence[float]): Transversal centre (c_1, ..., c_k).
        """
        if radius <= 0:
            raise DomainError(f"Domain: polydisk radius must be positive, got {radius}")
        bounds = [(-radius, radius)] + [(c - radius, c + radius) for c in center]
        return cls(bounds, radius=radius, center=center)

    def __str__(self):
        return f"Domain{{{', '.join(f'{lo:g}..{hi:g}' for lo, hi in self.bounds)}}}"

    @property
    def dimension(self) -> int:
        return len(self.bounds)

    def axis_name(self, axis: int) -> str:
        return self.labels[axis]

    def interval(self, axis: int) -> Interval:
        return self.bounds[axis]

    def width(self, axis: int = 0) -> float:
        lo, hi = self.bounds[axis]
        return hi - lo

    def x_max(self) -> float:
        """Largest |x| over the box."""
        lo, hi = self.bounds[0]
        return max(abs(lo), abs(hi))

    def lower(self) -> FloatArray:
        return np.array([lo for lo, _ in self.bounds])

    def upper(self) -> FloatArray:
        return np.array([hi for _, hi in self.bounds])

    def contains(self, *coords: FloatArray, tol: float = 0.0) -> np.ndarray:
        """
        Elementwise membership test.

        Args:
            *coords (FloatArray): One array per axis, broadcastable.
            tol (float): Slack allowed outside each face.
        Returns:
            inside (np.ndarray): Boolean array.
        """
        inside = np.ones(np.broadcast(*coords).shape, dtype=bool)
        for value, (lo, hi) in zip(coords, self.bounds):
            value = np.asarray(value)
            inside &= (value >= lo - tol) & (value <= hi + tol)
        return inside

    def require(self, *coords: FloatArray, what: str = "point"):
        """Raise DomainError unless every point lies in the box."""
        if not np.all(self.contains(*coords)):
            raise DomainError(f"{self}: {what} outside the domain")

    def interior(self, margin: float = 0.1) -> Domain:
        """
        The box shrunk by `margin` times each width on every face.

        Args:
            margin (float): Relative sampling margin, 10% by default.
        """
        shrunk = [
            (lo + margin * (hi - lo), hi - margin * (hi - lo)) for lo, hi in self.bounds
        ]
        return Domain(shrunk, labels=self.labels)

    def grid(self, counts: int | Sequence[int]) -> tuple[FloatArray, ...]:
        """
        Deterministic tensor grid over the box, returned as flattened coordinates.

        Args:
            counts (int | Sequence[int]): Points per axis.
        Returns:
            coords (tuple[FloatArray, ...]): One flat array per axis.
        """
        if isinstance(counts, int):
            counts = [counts] * self.dimension
        axes = [np.linspace(lo, hi, n) for (lo, hi), n in zip(self.bounds, counts)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return tuple(m.ravel() for m in mesh)

    def sample(self, rng: np.random.Generator, count: int) -> tuple[FloatArray, ...]:
        """Uniform random points in the box."""
        return tuple(rng.uniform(lo, hi, count) for lo, hi in self.bounds)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            self.axis_name(axis): list(interval)
            for axis, interval in enumerate(self.bounds)
        }
        if self.radius is not None:
            out["radius"] = self.radius
        if self.center is not None:
            out["center"] = list(self.center)
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Domain:
        """
        Converts data loaded from JSON into a new Domain.

        Args:
            data (dict): {"x": [lo, hi], "y": [lo, hi]} or {"x", "y1", "y2"}, plus
                "radius" and "center" for a polydisk.
        """
        axes = {key: value for key, value in data.items() if key not in ("radius", "center")}
        for names in (AXIS_NAMES[2], AXIS_NAMES[3], SURFACE_AXES):
            if set(axes) == set(names):
                return cls(
                    [tuple(axes[name]) for name in names],
                    radius=data.get("radius"),
                    center=data.get("center"),
                    labels=names,
                )
        raise DomainError(
            f"Domain: expected axes {AXIS_NAMES[2]}, {AXIS_NAMES[3]} or {SURFACE_AXES}, got {sorted(axes)}"
        )
