from __future__ import annotations
from typing import Callable

import numpy as np

from lamination.family import CurveFamily3D, LeafFamily2D, ScalarLeafFamily, SurfaceFamily3D
from lamination.partial_function import PartialSmoothFunction, leafwise_derivative
from smoothing.partition import PartitionLambda
from smoothing.transversal import TransversalSmoother
from util.errors import DomainError
from util.types import ArrayLike, FloatArray

type Transversal = Callable[..., FloatArray]


class CompositeApproximant:
    """
    psi(point) = sum_j phi(base, f_{j/J}(base)) Lambda_j(h(point)).

    Only the two members of the partition that are active at h(point) are summed.
    `transversal` is any smooth stand-in for pi: h_delta in R^2 and for surfaces.
    """

    def __init__(
        self,
        phi: PartialSmoothFunction,
        family: ScalarLeafFamily,
        J: int,
        transversal: Transversal,
    ):
        """
        Creates a CompositeApproximant.

        Args:
            phi (PartialSmoothFunction): Function of the class A being approximated.
            family (ScalarLeafFamily): The lamination.
            J (int): Number of partition cells per unit parameter.
            transversal (Transversal): Smooth approximant of pi.
        """
        self.phi = phi
        self.family = family
        self.partition = PartitionLambda(J)
        self.transversal = transversal

    def __str__(self):
        return f"CompositeApproximant.{self.phi.name}{{J={self.partition.J}}}"

    @property
    def J(self) -> int:
        return self.partition.J

    def _term(self, j: FloatArray, weight: FloatArray, base: list[FloatArray]) -> FloatArray:
        used = weight != 0
        out = np.zeros(weight.shape)
        if np.any(used):
            sub = [b[used] for b in base]
            a = j[used] / self.J
            out[used] = self.phi(*sub, self.family.evaluate(a, *sub, strict=False)) * weight[used]
        return out

    def __call__(self, *point: ArrayLike) -> FloatArray:
        arrays = np.broadcast_arrays(*[np.asarray(p, dtype=float) for p in point])
        shape = arrays[0].shape
        flat = [p.ravel() for p in arrays]
        h = np.ravel(self.transversal(*flat))
        j0, j1, w0, w1 = self.partition.active(h)
        base = flat[:-1]
        return (self._term(j0, w0, base) + self._term(j1, w1, base)).reshape(shape)

    def leafwise_derivative(self, a: ArrayLike, *base: ArrayLike):
        return leafwise_derivative(self, self.family, a, *base)


def build_psi(
    phi: PartialSmoothFunction, family: LeafFamily2D, J: int, smoother: TransversalSmoother
) -> CompositeApproximant:
    """Composite approximant of phi on a lamination of R^2, with h_delta in place of pi."""
    if J < 1:
        raise DomainError(f"{family}: J must be at least 1, got {J}")
    return CompositeApproximant(phi, family, J, smoother)


def build_psi_surface(
    phi: PartialSmoothFunction, family: SurfaceFamily3D, J: int, smoother: TransversalSmoother
) -> CompositeApproximant:
    """Composite approximant on a surface lamination, phi_j(x, y) = phi(x, y, f_{j/J}(x, y))."""
    if J < 1:
        raise DomainError(f"{family}: J must be at least 1, got {J}")
    return CompositeApproximant(phi, family, J, smoother)


class CurveCompositeApproximant:
    """
    psi(x, y) = sum_{j,k} phi(x, f_{(j/J, k/J)}(x)) Lambda_j(pi_delta^1) Lambda_k(pi_delta^2)
    for curves in R^3, with the smooth projection pi_delta in place of pi.
    """

    def __init__(self, phi: PartialSmoothFunction, family: CurveFamily3D, J: int, projection: Transversal):
        self.phi = phi
        self.family = family
        self.partition = PartitionLambda(J)
        self.projection = projection

    def __str__(self):
        return f"CurveCompositeApproximant.{self.phi.name}{{J={self.partition.J}}}"

    def __call__(self, x: ArrayLike, y1: ArrayLike, y2: ArrayLike) -> FloatArray:
        x, y1, y2 = (np.ravel(v) for v in np.broadcast_arrays(
            np.asarray(x, dtype=float), np.asarray(y1, dtype=float), np.asarray(y2, dtype=float)
        ))
        a = self.projection(x, y1, y2)
        first = self.partition.active(a[:, 0])
        second = self.partition.active(a[:, 1])
        J = self.partition.J
        out = np.zeros(x.shape)
        for j, wj in ((first[0], first[2]), (first[1], first[3])):
            for k, wk in ((second[0], second[2]), (second[1], second[3])):
                weight = wj * wk
                used = weight != 0
                if not np.any(used):
                    continue
                leaf = self.family.evaluate(j[used] / J, k[used] / J, x[used], strict=False)
                out[used] += self.phi(x[used], leaf[:, 0], leaf[:, 1]) * weight[used]
        return out


def build_psi_curve(
    phi: PartialSmoothFunction, family: CurveFamily3D, J: int, projection: Transversal
) -> CurveCompositeApproximant:
    if J < 1:
        raise DomainError(f"{family}: J must be at least 1, got {J}")
    return CurveCompositeApproximant(phi, family, J, projection)
