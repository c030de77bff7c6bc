"""
The projection pi(x, y) = a for y = f_a(x).

Scalar families are inverted by bisection on a, which only needs the
ordering a < a' => f_a < f_a'. Families that know their inverse in closed
form (or, for ODE families, by flowing back to x = 0) use it unless
bisection is requested explicitly.
"""

import logging

import numpy as np

from lamination.family import CurveFamily3D, LeafFamily, ScalarLeafFamily, PARAM_TOL
from util.errors import CoverageError, NumericError
from util.types import ArrayLike, FloatArray

logger = logging.getLogger(__name__)

BISECTION_TOL = 1e-10
BISECTION_MAX_ITER = 200


def bisect_param(
    family: ScalarLeafFamily,
    *point: ArrayLike,
    tol: float = BISECTION_TOL,
    max_iter: int = BISECTION_MAX_ITER,
    on_uncovered: str = "raise",
) -> FloatArray:
    """
    Vectorized bisection for pi on a scalar family.

    Args:
        family (ScalarLeafFamily): Ordered family.
        *point (ArrayLike): Base coordinates followed by the transversal coordinate.
        tol (float): Stop once |f_a(base) - y| <= tol.
        max_iter (int): Iteration cap.
        on_uncovered (str): "raise" or "nan" for points outside the leaves' span.
    Returns:
        a (FloatArray): Parameters, one per point.
    """
    arrays = np.broadcast_arrays(*[np.asarray(p, dtype=float) for p in point])
    shape = arrays[0].shape
    base = [b.ravel() for b in arrays[:-1]]
    y = arrays[-1].ravel()

    lo_val, hi_val = family.param_span(*base, y)
    covered = (lo_val - tol <= y) & (y <= hi_val + tol)
    if not np.all(covered) and on_uncovered == "raise":
        raise CoverageError(
            f"{family}: {np.count_nonzero(~covered)} point(s) not bracketed by the parameter range"
        )

    a_lo = np.full(y.shape, family.param_range[0])
    a_hi = np.full(y.shape, family.param_range[1])
    mid = 0.5 * (a_lo + a_hi)
    done = ~covered
    iteration = 0
    for iteration in range(max_iter):
        active = ~done
        if not np.any(active):
            break
        mid_active = 0.5 * (a_lo[active] + a_hi[active])
        base_active = [b[active] for b in base]
        resid = (
            family.evaluate(mid_active, *base_active, strict=False) - y[active]
        )
        mid[active] = mid_active
        below = resid < 0
        idx = np.flatnonzero(active)
        a_lo[idx[below]] = mid_active[below]
        a_hi[idx[~below]] = mid_active[~below]
        width = a_hi[idx] - a_lo[idx]
        finished = (np.abs(resid) <= tol) | (
            width <= 1e-15 * np.maximum(1.0, np.abs(mid_active))
        )
        done[idx[finished]] = True
    else:
        if not np.all(done):
            raise NumericError(
                f"{family}: bisection did not converge in {max_iter} iterations"
            )
    logger.debug(f"{family}: bisection finished after {iteration} iterations")

    mid[~covered] = np.nan
    return mid.reshape(shape)


def project_pi(
    family: LeafFamily,
    *point: ArrayLike,
    method: str = "auto",
    tol: float = BISECTION_TOL,
    max_iter: int = BISECTION_MAX_ITER,
    on_uncovered: str = "raise",
) -> FloatArray:
    """
    Recovers the leaf parameter of each point.

    Args:
        family (LeafFamily): Any catalog family.
        *point (ArrayLike): (x, y), (x, y, z) or (x, y1, y2).
        method (str): "auto" uses the inverse when the family has one, "bisection"
            forces bisection (scalar families only).
        on_uncovered (str): "raise" a CoverageError or return "nan" for uncovered points.
    Returns:
        a (FloatArray): Parameters; shaped (..., 2) for curves in R^3.
    """
    if method not in ("auto", "bisection"):
        raise ValueError(f"{family}: unknown projection method {method}")

    if isinstance(family, CurveFamily3D):
        a = family.inverse(*point)
        bad = ~np.isfinite(a).all(axis=-1)
        for axis, (lo, hi) in enumerate(family.param_box):
            comp = a[..., axis]
            bad |= (comp < lo - PARAM_TOL) | (comp > hi + PARAM_TOL)
        return _handle_uncovered(family, a, bad, on_uncovered, pair=True)

    if method == "bisection" or not family.has_inverse:
        return bisect_param(
            family, *point, tol=tol, max_iter=max_iter, on_uncovered=on_uncovered
        )

    a = family.inverse(*point)
    lo, hi = family.param_range
    bad = ~np.isfinite(a) | (a < lo - PARAM_TOL) | (a > hi + PARAM_TOL)
    return _handle_uncovered(family, a, bad, on_uncovered)


def _handle_uncovered(family, a: FloatArray, bad: np.ndarray, on_uncovered: str, pair=False):
    if not np.any(bad):
        return a
    if on_uncovered == "raise":
        raise CoverageError(
            f"{family}: {np.count_nonzero(bad)} point(s) not covered by the leaves"
        )
    a = np.array(a, dtype=float, copy=True)
    if pair:
        a[bad, :] = np.nan
    else:
        a[bad] = np.nan
    return a
