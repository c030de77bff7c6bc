from __future__ import annotations
import logging

import numpy as np
from scipy.special import roots_legendre

from lamination.slope_field import SlopeField3D
from util.errors import ConstructionError
from util.types import ArrayLike, FloatArray, Interval

logger = logging.getLogger(__name__)

# Kernel widths below this mean the strand is not continuous at the grid resolution
MIN_WIDTH = 1e-12


class BumpLambda:
    """Lambda(t) = cos^2 t on |t| <= pi/2, zero outside."""

    def __call__(self, t: ArrayLike) -> FloatArray:
        t = np.asarray(t, dtype=float)
        return np.where(np.abs(t) <= 0.5 * np.pi, np.cos(t) ** 2, 0.0)

    def derivative(self, t: ArrayLike) -> FloatArray:
        t = np.asarray(t, dtype=float)
        return np.where(np.abs(t) <= 0.5 * np.pi, -np.sin(2.0 * t), 0.0)


class BumpKernel:
    """
    The C^infinity bump exp(-1/(1 - s^2)) on (-1, 1), discretized with
    Gauss-Legendre nodes and normalized to unit mass.
    """

    def __init__(self, order: int = 32):
        nodes, weights = roots_legendre(order)
        mass = weights * np.exp(-1.0 / (1.0 - nodes**2))
        self.order = order
        self.nodes: FloatArray = nodes
        self.weights: FloatArray = mass / mass.sum()

    def __str__(self):
        return f"BumpKernel{{order={self.order}}}"

    def offsets(self, width: float) -> FloatArray:
        return width * self.nodes


def mollified_values(
    field: SlopeField3D, x: FloatArray, y1: float, y2: float, width: float, kernel: BumpKernel
) -> FloatArray:
    """(F(., y1, y2) * kernel_width)(x) for a batch of x; returns (n, 2)."""
    x = np.asarray(x, dtype=float)
    shifted = x[:, None] - kernel.offsets(width)[None, :]
    values = field(shifted, y1, y2)
    return np.einsum("nkc,k->nc", values, kernel.weights)


class MollifiedStrand:
    """A smoothing F_mn of x -> F(x, m delta, n delta) within delta in sup norm."""

    def __init__(
        self,
        field: SlopeField3D,
        m: int,
        n: int,
        delta: float,
        width: float,
        distance: float,
        kernel: BumpKernel,
    ):
        self.field = field
        self.m = m
        self.n = n
        self.delta = delta
        self.width = width
        self.distance = distance
        self.kernel = kernel

    def __str__(self):
        return f"MollifiedStrand{{m={self.m}, n={self.n}, width={self.width:.3g}}}"

    def __call__(self, x: ArrayLike) -> FloatArray:
        return mollified_values(
            self.field, np.atleast_1d(x), self.m * self.delta, self.n * self.delta, self.width, self.kernel
        )


def strand_distance(
    field: SlopeField3D, m: int, n: int, delta: float, width: float, xs: FloatArray, kernel: BumpKernel
) -> float:
    """Sampled sup over xs of |F_mn(x) - F(x, m delta, n delta)|."""
    y1, y2 = m * delta, n * delta
    smooth = mollified_values(field, xs, y1, y2, width, kernel)
    return float(np.max(np.linalg.norm(smooth - field(xs, y1, y2), axis=-1)))


def mollify_strand(
    field: SlopeField3D,
    m: int,
    n: int,
    delta: float,
    x_range: Interval,
    kernel: BumpKernel,
    samples: int = 2001,
    width: float | None = None,
) -> MollifiedStrand:
    """
    Convolves the strand x -> F(x, m delta, n delta) with the bump kernel,
    halving the kernel width from a quarter of the x-range until the sampled sup
    distance drops below delta.

    Args:
        field (SlopeField3D): The slope field.
        m, n (int): Grid node indices.
        delta (float): Grid spacing and distance target.
        x_range (Interval): Interval the strand is needed on.
        kernel (BumpKernel): Quadrature of the mollifier.
        samples (int): Sup-norm sample count.
        width (float | None): Starting width.
    """
    lo, hi = x_range
    xs = np.linspace(lo, hi, samples)
    width = width if width is not None else 0.25 * (hi - lo)
    while width >= MIN_WIDTH:
        distance = strand_distance(field, m, n, delta, width, xs, kernel)
        if distance < delta:
            return MollifiedStrand(field, m, n, delta, width, distance, kernel)
        width *= 0.5
    raise ConstructionError(
        f"{field}: strand ({m}, {n}) not within {delta:g} of its mollification at any width",
        worst=(m, n),
    )
