from __future__ import annotations
import logging
from typing import Optional, Sequence

import numpy as np

from flow.smoothed_field import SmoothedField
from lamination.domain import Domain
from lamination.family import CurveFamily3D
from lamination.ode import Rk4Integrator
from util.errors import CoverageError
from util.types import ArrayLike, FloatArray

logger = logging.getLogger(__name__)

# Halvings of R before giving up on covering D_R
MAX_HALVINGS = 30


def _batch(x: ArrayLike, y1: ArrayLike, y2: ArrayLike) -> tuple[FloatArray, FloatArray]:
    x, y1, y2 = np.broadcast_arrays(
        np.asarray(x, dtype=float), np.asarray(y1, dtype=float), np.asarray(y2, dtype=float)
    )
    return x.ravel(), np.column_stack([y1.ravel(), y2.ravel()])


def _integrator_for(sf: SmoothedField, integrator: Optional[Rk4Integrator]) -> Rk4Integrator:
    integrator = integrator or Rk4Integrator()
    return integrator.with_step(min(integrator.step, 1e-3))


def integrate_approx_leaf(
    sf: SmoothedField,
    a: ArrayLike,
    x: ArrayLike,
    integrator: Optional[Rk4Integrator] = None,
    on_exit: str = "raise",
) -> FloatArray:
    """
    f_a^delta(x): the solution of dy/dx = F_delta(x, y) with f_a^delta(0) = a.

    Args:
        sf (SmoothedField): The smoothed field.
        a (ArrayLike): Parameter pair (2,) or batch (n, 2).
        x (ArrayLike): Target abscissae, broadcast against the batch.
        on_exit (str): "raise" LeafTruncated when a leaf leaves the box, "nan" to blank it.
    Returns:
        values (FloatArray): Shape (n, 2).
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = max(a.shape[0], x.shape[0])
    a = np.broadcast_to(a, (n, 2))
    x = np.broadcast_to(x, (n,))
    return _integrator_for(sf, integrator).integrate(sf.rhs, 0.0, a, x, box=sf.box, on_exit=on_exit)


class SmoothProjection:
    """
    pi_delta(x, y): the value at x = 0 of the backward F_delta-solution through (x, y).

    Constant along F_delta-integral curves by construction, so
    pi_delta(x, f_a^delta(x)) = a up to the integrator tolerance.
    """

    def __init__(self, sf: SmoothedField, integrator: Optional[Rk4Integrator] = None):
        self.sf = sf
        self.integrator = _integrator_for(sf, integrator)

    def __str__(self):
        return f"SmoothProjection{{delta={self.sf.delta:g}}}"

    @property
    def tol(self) -> float:
        return self.integrator.tol

    def values(self, x: ArrayLike, y1: ArrayLike, y2: ArrayLike) -> FloatArray:
        """pi_delta on a batch; points whose backward solution exits the box read NaN."""
        x, y = _batch(x, y1, y2)
        return self.integrator.integrate(self.sf.rhs, x, y, 0.0, box=self.sf.box, on_exit="nan")

    def __call__(self, x: ArrayLike, y1: ArrayLike, y2: ArrayLike) -> FloatArray:
        a = self.values(x, y1, y2)
        lost = ~np.isfinite(a).all(axis=1)
        if np.any(lost):
            raise CoverageError(
                f"{self}: backward solution left {self.sf.box} before x=0 at {np.count_nonzero(lost)} point(s)"
            )
        return a

    def grad_y(self, x: ArrayLike, y1: ArrayLike, y2: ArrayLike, h: Optional[float] = None) -> FloatArray:
        """
        Central-difference transversal gradient; all four stencil points per
        sample go through a single batched integration.

        Returns:
            grad (FloatArray): (n, 2, 2) with [:, i, j] = d pi_delta^i / d y_j.
        """
        h = h if h is not None else max(1e-6, self.sf.delta / 100)
        x, y = _batch(x, y1, y2)
        n = x.size
        shifts = np.array([[h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]])
        stencil_y = (y[None, :, :] + shifts[:, None, :]).reshape(-1, 2)
        a = self(np.tile(x, 4), stencil_y[:, 0], stencil_y[:, 1]).reshape(4, n, 2)
        d1 = (a[0] - a[1]) / (2 * h)
        d2 = (a[2] - a[3]) / (2 * h)
        return np.stack([d1, d2], axis=-1)

    def grad_norm(self, x: ArrayLike, y1: ArrayLike, y2: ArrayLike) -> FloatArray:
        return np.linalg.norm(self.grad_y(x, y1, y2), ord=2, axis=(1, 2))

    def leafwise_derivative(
        self, family: CurveFamily3D, a1: ArrayLike, a2: ArrayLike, x: ArrayLike, h: float = 1e-3
    ) -> FloatArray:
        """
        d/dx pi_delta(x, f_a(x)) along true leaves of the lamination, by central
        differences at x +- h.

        Returns:
            deriv (FloatArray): (n, 2).
        """
        a1, a2, x = (np.ravel(v) for v in np.broadcast_arrays(
            np.asarray(a1, dtype=float), np.asarray(a2, dtype=float), np.asarray(x, dtype=float)
        ))
        xs = np.concatenate([x + h, x - h])
        leaf = family.evaluate(np.tile(a1, 2), np.tile(a2, 2), xs, strict=False)
        a = self(xs, leaf[:, 0], leaf[:, 1])
        n = x.size
        return (a[:n] - a[n:]) / (2 * h)


def project_pi_delta(
    sf: SmoothedField, x: ArrayLike, y1: ArrayLike, y2: ArrayLike, integrator: Optional[Rk4Integrator] = None
) -> FloatArray:
    return SmoothProjection(sf, integrator)(x, y1, y2)


def select_radius(
    projection: SmoothProjection,
    C: Optional[float] = None,
    center: Optional[Sequence[float]] = None,
    grid: int = 5,
) -> Domain:
    """
    Shrinks R from min(1/(2C), room in the box) until every backward
    integration from a grid over D_R, corners included, reaches x = 0 inside
    the box, so that D_R lies in the region swept by the approximate leaves.

    Args:
        projection (SmoothProjection): pi_delta.
        C (Optional[float]): Separation constant; the field's C by default.
        center (Optional[Sequence[float]]): Transversal centre; the centre of the y-box by default.
        grid (int): Points per axis of the coverage probe.
    Returns:
        disk (Domain): The polydisk D_R.
    """
    sf = projection.sf
    box = sf.box
    C = C if C is not None else sf.C
    if center is None:
        center = [0.5 * sum(box.interval(axis)) for axis in (1, 2)]
    x_lo, x_hi = box.interval(0)
    room = [-x_lo, x_hi]
    for axis, c in zip((1, 2), center):
        lo, hi = box.interval(axis)
        room += [c - lo, hi - c]
    R = min(0.5 / C, min(room))
    if R <= 0:
        raise CoverageError(f"{projection}: centre {tuple(center)} leaves no room in {box}")

    for _ in range(MAX_HALVINGS):
        disk = Domain.polydisk(R, center)
        a = projection.values(*disk.grid(grid))
        if np.all(np.isfinite(a)):
            logger.info(f"{projection}: R={R:.4g} with C={C:.4g} (C R={C * R:.3g}) around {tuple(center)}")
            return disk
        R *= 0.5
    raise CoverageError(f"{projection}: no radius around {tuple(center)} is covered by the approximate leaves")
