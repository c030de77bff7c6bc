"""
Leaf reconstruction by integrating dy/dx = F(x, y).

Rk4Integrator works on a batch of independent initial value problems at
once. Each problem runs in a scaled time s in [0, 1] with
x = x0 + s (x1 - x0), so every member of the batch may start and stop at its
own x while sharing one step schedule.
"""

from __future__ import annotations
import logging
import threading
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from lamination.domain import Domain
from lamination.family import CurveFamily3D, LeafFamily2D
from lamination.slope_field import SlopeField, SlopeField2D, field_values
from util.errors import IntegrationError, LeafTruncated
from util.types import ArrayLike, FloatArray, Interval

logger = logging.getLogger(__name__)

type Rhs = Callable[[FloatArray, FloatArray], FloatArray]

# Spacing of cached stations on ODE-integrated leaves
STATION_SPACING = 1e-2
# Leaves kept per family before the oldest is dropped
MAX_CACHED_LEAVES = 2048
# Leaves may touch the box faces within this tolerance
BOX_TOL = 1e-9


class Rk4Integrator:
    """Classical fourth-order Runge-Kutta with a step-doubling acceptance test."""

    def __init__(self, step: float = 1e-3, tol: float = 1e-10, max_refinements: int = 8):
        """
        Creates an Rk4Integrator.

        Args:
            step (float): Largest step in x.
            tol (float): Two successive answers (n and 2n steps) must agree to this.
            max_refinements (int): Number of step doublings before giving up.
        """
        self.step = step
        self.tol = tol
        self.max_refinements = max_refinements

    def __str__(self):
        return f"Rk4Integrator{{step={self.step:g}, tol={self.tol:g}}}"

    def with_step(self, step: float) -> Rk4Integrator:
        return Rk4Integrator(step, self.tol, self.max_refinements)

    def _run(
        self,
        rhs: Rhs,
        x0: FloatArray,
        y0: FloatArray,
        x1: FloatArray,
        n_steps: int,
        box: Optional[Domain],
    ) -> tuple[FloatArray, FloatArray]:
        span = (x1 - x0)[:, None]
        y = y0.copy()
        alive = np.ones(len(y0), dtype=bool)
        exit_x = np.full(len(y0), np.nan)
        ds = 1.0 / n_steps
        for i in range(n_steps):
            s = i * ds
            idx = np.flatnonzero(alive)
            if idx.size == 0:
                break
            xa, ya, sp = x0[idx] + s * span[idx, 0], y[idx], span[idx]
            k1 = sp * rhs(xa, ya)
            k2 = sp * rhs(xa + 0.5 * ds * sp[:, 0], ya + 0.5 * ds * k1)
            k3 = sp * rhs(xa + 0.5 * ds * sp[:, 0], ya + 0.5 * ds * k2)
            k4 = sp * rhs(xa + ds * sp[:, 0], ya + ds * k3)
            y_new = ya + ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(y_new)):
                raise IntegrationError(
                    "non-finite state in RK4 step", last_x=float(xa[~np.isfinite(y_new).all(axis=1)][0])
                )
            y[idx] = y_new
            if box is not None:
                x_next = xa + ds * sp[:, 0]
                inside = np.ones(idx.size, dtype=bool)
                for axis in range(y.shape[1]):
                    lo, hi = box.interval(axis + 1)
                    inside &= (y_new[:, axis] >= lo - BOX_TOL) & (y_new[:, axis] <= hi + BOX_TOL)
                left = idx[~inside]
                alive[left] = False
                exit_x[left] = x_next[~inside]
                y[left] = np.nan
        return y, exit_x

    def integrate(
        self,
        rhs: Rhs,
        x0: ArrayLike,
        y0: FloatArray,
        x1: ArrayLike,
        box: Optional[Domain] = None,
        on_exit: str = "raise",
    ) -> FloatArray:
        """
        Integrates a batch from x0 to x1.

        Args:
            rhs (Rhs): (x of shape (n,), y of shape (n, k)) -> (n, k).
            x0 (ArrayLike): Start abscissae, broadcast to the batch.
            y0 (FloatArray): Initial states of shape (n, k).
            x1 (ArrayLike): Target abscissae, broadcast to the batch.
            box (Optional[Domain]): Transversal bounds (axes 1..k); leaving them ends the leaf.
            on_exit (str): "raise" LeafTruncated, or "nan" to blank exited members.
        Returns:
            y1 (FloatArray): States at x1, shape (n, k).
        """
        y0 = np.atleast_2d(np.asarray(y0, dtype=float))
        n = y0.shape[0]
        x0 = np.broadcast_to(np.asarray(x0, dtype=float), (n,)).copy()
        x1 = np.broadcast_to(np.asarray(x1, dtype=float), (n,)).copy()
        longest = float(np.max(np.abs(x1 - x0), initial=0.0))
        if longest == 0.0:
            return y0.copy()

        # Members settle one by one, so each answer is independent of the rest of the batch
        n_steps = max(1, int(np.ceil(longest / self.step)))
        coarse, _ = self._run(rhs, x0, y0, x1, n_steps, box)
        fine = np.full_like(y0, np.nan)
        exit_x = np.full(n, np.nan)
        pending = np.arange(n)
        for _ in range(self.max_refinements):
            n_steps *= 2
            result, result_exit = self._run(rhs, x0[pending], y0[pending], x1[pending], n_steps, box)
            both = np.isfinite(coarse).all(axis=1) & np.isfinite(result).all(axis=1)
            gap = np.max(np.abs(result - coarse), axis=1, where=both[:, None], initial=0.0)
            settled = gap <= self.tol
            fine[pending[settled]] = result[settled]
            exit_x[pending[settled]] = result_exit[settled]
            pending, coarse = pending[~settled], result[~settled]
            if pending.size == 0:
                break
            logger.debug(f"{self}: refining {pending.size} member(s) to {n_steps} steps, disagreement {gap.max():.3g}")
        else:
            raise IntegrationError(
                f"{self}: no agreement to {self.tol:g} after {self.max_refinements} refinements",
                last_x=float(x0[pending[0]]),
            )

        exited = np.isfinite(exit_x)
        if np.any(exited) and on_exit == "raise":
            first = int(np.flatnonzero(exited)[0])
            raise LeafTruncated(f"{self}: leaf left the box", exit_x=float(exit_x[first]))
        return fine

    def trajectory(
        self,
        rhs: Rhs,
        y0: FloatArray,
        stations: FloatArray,
        box: Optional[Domain] = None,
    ) -> FloatArray:
        """
        Values of the solutions through (0, y0) at sorted stations, integrating
        forward and backward from x = 0. Members that leave the box read NaN
        from their exit onward.

        Args:
            y0 (FloatArray): States at x = 0, shape (n, k).
            stations (FloatArray): Increasing abscissae.
        Returns:
            values (FloatArray): Shape (len(stations), n, k).
        """
        y0 = np.atleast_2d(np.asarray(y0, dtype=float))
        stations = np.asarray(stations, dtype=float)
        out = np.full((len(stations),) + y0.shape, np.nan)
        split = int(np.searchsorted(stations, 0.0))
        for indices in (range(split, len(stations)), range(split - 1, -1, -1)):
            x_prev, y_prev = 0.0, y0.copy()
            for i in indices:
                alive = np.isfinite(y_prev).all(axis=1)
                y_next = np.full_like(y_prev, np.nan)
                if np.any(alive):
                    y_next[alive] = self.integrate(
                        rhs, x_prev, y_prev[alive], stations[i], box=box, on_exit="nan"
                    )
                out[i] = y_next
                x_prev, y_prev = stations[i], y_next
        return out


def station_grid(interval: Interval, spacing: float = STATION_SPACING) -> FloatArray:
    """Stations over `interval` with x = 0 included whenever it lies inside."""
    lo, hi = interval
    right = np.arange(0.0, hi + 0.5 * spacing, spacing) if hi >= 0 else np.array([])
    left = -np.arange(spacing, -lo + 0.5 * spacing, spacing) if lo < 0 else np.array([])
    grid = np.concatenate([left[::-1], right])
    grid = grid[(grid >= lo - 1e-12) & (grid <= hi + 1e-12)]
    return np.clip(grid, lo, hi)


class _CachedLeaf:
    """Dense output of one integrated leaf over the stations where it stayed in the box."""

    def __init__(self, stations: FloatArray, values: FloatArray, slopes: FloatArray):
        valid = np.isfinite(values).all(axis=1)
        zero = int(np.argmin(np.abs(stations)))
        lo = zero
        while lo > 0 and valid[lo - 1]:
            lo -= 1
        hi = zero
        while hi < len(stations) - 1 and valid[hi + 1]:
            hi += 1
        self.x_range = (stations[lo], stations[hi])
        self.exit_low = stations[lo - 1] if lo > 0 else None
        self.exit_high = stations[hi + 1] if hi < len(stations) - 1 else None
        sl = slice(lo, hi + 1)
        if hi > lo:
            self.spline = CubicHermiteSpline(stations[sl], values[sl], slopes[sl], axis=0)
        else:
            self.spline = None
            self.constant = values[zero]

    def __call__(self, x: FloatArray) -> FloatArray:
        lo, hi = self.x_range
        if np.any(x < lo - 1e-12):
            raise LeafTruncated("leaf left the box", exit_x=float(self.exit_low))
        if np.any(x > hi + 1e-12):
            raise LeafTruncated("leaf left the box", exit_x=float(self.exit_high))
        if self.spline is None:
            return np.broadcast_to(self.constant, np.shape(x) + self.constant.shape)
        return self.spline(x)


class _LeafCache:
    """
    Per-parameter leaf cache holding at most `max_leaves` leaves, oldest dropped
    first. Cached leaves are read without locking. Missing leaves of a batch are
    integrated together, and a leaf being built by one thread is awaited by the
    others under its own guard.
    """

    def __init__(self, field: SlopeField, domain: Domain, integrator: Rk4Integrator, max_leaves: int = MAX_CACHED_LEAVES):
        self.field = field
        self.domain = domain
        self.integrator = integrator.with_step(min(integrator.step, STATION_SPACING / 10))
        self.stations = station_grid(domain.interval(0))
        self.max_leaves = max_leaves
        self.leaves: dict[tuple[float, ...], _CachedLeaf] = {}
        self.building: dict[tuple[float, ...], threading.Lock] = {}
        # Guards inserts, evictions and the building map, never held while integrating
        self.lock = threading.Lock()

    def _integrate(self, keys: list[tuple[float, ...]]) -> list[_CachedLeaf]:
        values = self.integrator.trajectory(self.field.rhs, np.array(keys), self.stations, box=self.domain)
        x = np.broadcast_to(self.stations[:, None], values.shape[:2])
        ok = np.isfinite(values).all(axis=-1)
        slopes = np.full_like(values, np.nan)
        if np.any(ok):
            slopes[ok] = field_values(self.field, x[ok], values[ok])
        leaves = []
        for i, a in enumerate(keys):
            leaf = _CachedLeaf(self.stations, values[:, i], slopes[:, i])
            if leaf.exit_low is not None or leaf.exit_high is not None:
                logger.warning(
                    f"{self.field}: leaf a={a} truncated to x in [{leaf.x_range[0]:g}, {leaf.x_range[1]:g}]"
                )
            leaves.append(leaf)
        return leaves

    def leaves_for(self, keys: list[tuple[float, ...]]) -> list[_CachedLeaf]:
        wanted = list(dict.fromkeys(keys))
        found = {}
        for key in wanted:
            leaf = self.leaves.get(key)
            if leaf is not None:
                found[key] = leaf
        while len(found) < len(wanted):
            mine, waiting = [], []
            with self.lock:
                for key in wanted:
                    if key in found:
                        continue
                    leaf = self.leaves.get(key)
                    if leaf is not None:
                        found[key] = leaf
                    elif key in self.building:
                        waiting.append(self.building[key])
                    else:
                        guard = threading.Lock()
                        guard.acquire()
                        self.building[key] = guard
                        mine.append(key)
            if mine:
                try:
                    built = dict(zip(mine, self._integrate(mine)))
                    found.update(built)
                    with self.lock:
                        self.leaves.update(built)
                        while len(self.leaves) > self.max_leaves:
                            del self.leaves[next(iter(self.leaves))]
                finally:
                    with self.lock:
                        guards = [self.building.pop(key) for key in mine]
                    for guard in guards:
                        guard.release()
            # A leaf evicted or failed elsewhere is claimed again on the next pass
            for guard in waiting:
                with guard:
                    pass
        return [found[key] for key in keys]

    def evaluate(self, params: FloatArray, x: FloatArray) -> FloatArray:
        """params (n, k) and x (n,) -> (n, k)."""
        out = np.empty(params.shape, dtype=float)
        keys, inverse = np.unique(params, axis=0, return_inverse=True)
        inverse = np.ravel(inverse)
        leaves = self.leaves_for([tuple(float(v) for v in key) for key in keys])
        for i, leaf in enumerate(leaves):
            members = inverse == i
            out[members] = leaf(x[members])
        return out

    def project(self, x: FloatArray, y: FloatArray) -> FloatArray:
        """Flows (x, y) back to x = 0; points whose backward solution exits read NaN."""
        return self.integrator.integrate(
            self.field.rhs, x, y, 0.0, box=self.domain, on_exit="nan"
        )


class OdeLeafFamily2D(LeafFamily2D):
    """Leaves of a planar slope field, integrated from f_a(0) = a."""

    def __init__(self, field: SlopeField2D, domain: Domain, integrator: Rk4Integrator, param_range: Optional[Interval] = None):
        self.field = field
        self.cache = _LeafCache(field, domain, integrator)
        super().__init__(
            field.name,
            domain,
            param_range or domain.interval(1),
            self._evaluate,
            lambda a, x: field(x, self._evaluate(a, x)),
            self._project,
            provenance="ode",
        )

    def _evaluate(self, a, x):
        a, x = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(x, dtype=float))
        values = self.cache.evaluate(a.reshape(-1, 1), x.ravel())
        return values[:, 0].reshape(a.shape)

    def _project(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        a = self.cache.project(x.ravel(), y.reshape(-1, 1))
        return a[:, 0].reshape(x.shape)


class OdeCurveFamily3D(CurveFamily3D):
    """Curves of a slope field in R^3, integrated from f_a(0) = a."""

    def __init__(self, field: SlopeField, domain: Domain, integrator: Rk4Integrator, param_box=None):
        self.field = field
        self.cache = _LeafCache(field, domain, integrator)
        super().__init__(
            field.name,
            domain,
            param_box or (domain.interval(1), domain.interval(2)),
            self._evaluate,
            lambda a1, a2, x: field.rhs(
                np.ravel(np.broadcast_to(x, np.broadcast(a1, a2, x).shape)),
                self._evaluate(a1, a2, x).reshape(-1, 2),
            ).reshape(np.broadcast(a1, a2, x).shape + (2,)),
            self._project,
            provenance="ode",
        )

    def _evaluate(self, a1, a2, x):
        a1, a2, x = np.broadcast_arrays(
            np.asarray(a1, dtype=float), np.asarray(a2, dtype=float), np.asarray(x, dtype=float)
        )
        params = np.column_stack([a1.ravel(), a2.ravel()])
        return self.cache.evaluate(params, x.ravel()).reshape(a1.shape + (2,))

    def _project(self, x, y1, y2):
        x, y1, y2 = np.broadcast_arrays(
            np.asarray(x, dtype=float), np.asarray(y1, dtype=float), np.asarray(y2, dtype=float)
        )
        a = self.cache.project(x.ravel(), np.column_stack([y1.ravel(), y2.ravel()]))
        return a.reshape(x.shape + (2,))


def family_from_slope_field(
    field: SlopeField,
    domain: Domain,
    integrator: Optional[Rk4Integrator] = None,
) -> OdeLeafFamily2D | OdeCurveFamily3D:
    """
    Builds the lamination whose leaves are the integral curves of `field`.

    Args:
        field (SlopeField): Planar or spatial slope field.
        domain (Domain): Box; leaves leaving it are truncated at the exit.
        integrator (Optional[Rk4Integrator]): Defaults to step 1e-3, tolerance 1e-10.
    """
    integrator = integrator or Rk4Integrator()
    if field.dimension == 2:
        return OdeLeafFamily2D(field, domain, integrator)
    return OdeCurveFamily3D(field, domain, integrator)
