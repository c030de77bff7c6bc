"""
Comparison estimates between the true curve lamination and the one integrated
from the smoothed field F_delta: leaf deviation, leaf separation, the
transversal gradient of pi_delta and the leafwise derivative of pi_delta along
true leaves.
"""

from __future__ import annotations
import logging
from typing import Optional

import numpy as np

from flow.projection import SmoothProjection, integrate_approx_leaf
from flow.smoothed_field import SmoothedField
from lamination.domain import Domain
from lamination.family import CurveFamily3D
from lamination.ode import Rk4Integrator
from lamination.projection import project_pi
from report.bound_report import BoundReport, SAMPLED_SUP_NOTE
from util.errors import DomainError
from util.types import FloatArray

logger = logging.getLogger(__name__)

SUITE = "curve"
C_IDENTIFICATION_NOTE = "separation constant taken as the construction constant C of F_delta"


def _params(sf: SmoothedField, **extra) -> dict:
    params = {"family": sf.field.name, "delta": sf.delta, "C": sf.C, "L": sf.L}
    params.update(extra)
    return params


def sample_parameters(box: Domain, rng: np.random.Generator, count: int, margin: float = 0.1) -> FloatArray:
    """Random starting points a = f_a(0) in the transversal interior of the box; (count, 2)."""
    inner = box.interior(margin)
    return np.column_stack([rng.uniform(*inner.interval(axis), count) for axis in (1, 2)])


def approx_trajectories(
    sf: SmoothedField, a: FloatArray, stations: FloatArray, integrator: Optional[Rk4Integrator] = None
) -> FloatArray:
    """f_a^delta at sorted stations for every row of a; (len(stations), n, 2), NaN past a box exit."""
    integrator = integrator or Rk4Integrator()
    integrator = integrator.with_step(min(integrator.step, 1e-3))
    return integrator.trajectory(sf.rhs, a, stations, box=sf.box)


def leaf_deviation(
    sf: SmoothedField,
    family: CurveFamily3D,
    a: FloatArray,
    stations: FloatArray,
    integrator: Optional[Rk4Integrator] = None,
) -> FloatArray:
    """
    phi_a^delta(x) = |f_a^delta(x) - f_a(x)| at each station for each leaf.

    Returns:
        phi (FloatArray): (len(stations), n); NaN where the approximate leaf left the box.
    """
    approx = approx_trajectories(sf, a, stations, integrator)
    exact = family.evaluate(a[None, :, 0], a[None, :, 1], stations[:, None], strict=False)
    return np.linalg.norm(approx - exact, axis=-1)


def lemma5_bound(x: FloatArray, L: float, delta: float) -> FloatArray:
    return delta ** np.exp(-2.0 * L * np.abs(x))


def lemma5_report(
    xs: FloatArray, phi: FloatArray, L: float, delta: float, params: Optional[dict] = None
) -> BoundReport:
    """
    phi(x) <= delta^(e^(-2 L |x|)) wherever phi < 1/2.

    Points with phi <= delta pass outright since the bound never drops below
    delta; the report is flagged vacuous when no point has delta < phi < 1/2.
    """
    xs = np.asarray(xs, dtype=float).ravel()
    phi = np.asarray(phi, dtype=float).ravel()
    usable = np.isfinite(phi) & (phi < 0.5)
    in_window = usable & (phi > delta)
    report = BoundReport.from_pointwise(
        "lemma5",
        phi[usable],
        lemma5_bound(xs[usable], L, delta),
        xs=xs[usable],
        suite=SUITE,
        params=params or {"delta": delta, "L": L},
        grid=f"{xs.size} points",
        notes=[SAMPLED_SUP_NOTE],
    )
    skipped = int(np.count_nonzero(~usable))
    if skipped:
        report.notes.append(f"{skipped} point(s) with phi >= 1/2 outside the hypotheses")
    if not np.any(in_window):
        report.vacuous = True
        report.notes.append("no point with delta < phi < 1/2: holds vacuously")
    return report


def check_lemma5(
    sf: SmoothedField,
    family: CurveFamily3D,
    L: float,
    rng: np.random.Generator,
    leaves: int = 20,
    stations: int = 50,
    integrator: Optional[Rk4Integrator] = None,
) -> BoundReport:
    """Leaf deviation against delta^(e^(-2 L x)) on x in [0, log 2 / (2 L)]."""
    if L * np.log(2.0) <= 1.0:
        raise DomainError(f"{sf}: the comparison estimate needs L log 2 > 1, got L={L:g}")
    x_hi = min(np.log(2.0) / (2.0 * L), sf.box.interval(0)[1])
    xs = np.linspace(0.0, x_hi, stations)
    a = sample_parameters(sf.box, rng, leaves)
    phi = leaf_deviation(sf, family, a, xs, integrator)
    grid_x = np.broadcast_to(xs[:, None], phi.shape)
    report = lemma5_report(grid_x, phi, L, sf.delta, params=_params(sf, L=L))
    report.grid = f"{leaves} leaves x {stations} stations on [0, {x_hi:.4g}]"
    return report


def corollary1_window(tau: float, L: float) -> float:
    return np.log(1.0 / tau) / (2.0 * L)


def check_corollary1(
    sf: SmoothedField,
    family: CurveFamily3D,
    tau: float,
    L: float,
    rng: np.random.Generator,
    leaves: int = 100,
    stations: int = 100,
    integrator: Optional[Rk4Integrator] = None,
) -> BoundReport:
    """
    max phi_a^delta(x) <= delta^tau for |x| <= log(1/tau) / (2 L).

    Args:
        tau (float): Exponent in (0, 1) with delta^tau < 1/2.
        L (float): Effective log-Lipschitz constant.
    """
    if not 0 < tau < 1:
        raise DomainError(f"{sf}: tau must lie in (0, 1), got {tau:g}")
    if sf.delta**tau >= 0.5:
        raise DomainError(f"{sf}: delta^tau = {sf.delta**tau:.3g} is not below 1/2")
    lo, hi = sf.box.interval(0)
    window = min(corollary1_window(tau, L), -lo, hi)
    xs = np.linspace(-window, window, stations)
    a = sample_parameters(sf.box, rng, leaves)
    phi = leaf_deviation(sf, family, a, xs, integrator)
    finite = np.isfinite(phi)
    report = BoundReport.from_pointwise(
        "corollary1",
        phi[finite],
        sf.delta**tau,
        suite=SUITE,
        params=_params(sf, tau=tau, L=L),
        grid=f"{leaves} leaves x {stations} stations on |x| <= {window:.4g}",
        notes=[SAMPLED_SUP_NOTE],
    )
    worst_x = np.max(np.where(finite, phi, -np.inf), axis=1)
    report.series = np.column_stack([xs, worst_x, np.full(stations, sf.delta**tau)])
    lost = int(np.count_nonzero(~finite))
    if lost:
        report.notes.append(f"{lost} sample(s) where the approximate leaf left the box")
    return report


def check_leaf_separation(
    sf: SmoothedField,
    rng: np.random.Generator,
    pairs: int = 50,
    spacing: float = 1e-4,
    window: Optional[float] = None,
    stations: int = 41,
    integrator: Optional[Rk4Integrator] = None,
) -> list[BoundReport]:
    """
    delta^(C|x|) |da| <= |df^delta(x)| <= delta^(-C|x|) |da| for leaf pairs
    started `spacing` apart, plus the pointwise rate
    |d/dx df^delta| <= C log(1/delta) |df^delta| behind both envelopes.

    Args:
        window (Optional[float]): Half-width in x; 1/(2C) clipped to the box by default.
    """
    lo, hi = sf.box.interval(0)
    window = window if window is not None else 0.5 / sf.C
    window = min(window, -lo, hi)
    xs = np.linspace(-window, window, stations)

    a = sample_parameters(sf.box, rng, pairs)
    angle = rng.uniform(0.0, 2.0 * np.pi, pairs)
    b = a + spacing * np.column_stack([np.cos(angle), np.sin(angle)])
    da = np.linalg.norm(b - a, axis=1)

    traj = approx_trajectories(sf, np.vstack([a, b]), xs, integrator)
    fa, fb = traj[:, :pairs], traj[:, pairs:]
    gap = np.linalg.norm(fb - fa, axis=-1)
    finite = np.isfinite(gap)

    x_grid = np.broadcast_to(xs[:, None], gap.shape)
    lower_env = sf.delta ** (sf.C * np.abs(x_grid)) * da[None, :]
    upper_env = sf.delta ** (-sf.C * np.abs(x_grid)) * da[None, :]

    rate = np.full(gap.shape, np.nan)
    if np.any(finite):
        slopes_a = sf(x_grid[finite], fa[finite][:, 0], fa[finite][:, 1])
        slopes_b = sf(x_grid[finite], fb[finite][:, 0], fb[finite][:, 1])
        rate[finite] = np.linalg.norm(slopes_b - slopes_a, axis=-1)
    rate_bound = sf.C * np.log(1.0 / sf.delta) * gap

    common = {
        "slack": 1e-12 * spacing,
        "suite": SUITE,
        "params": _params(sf),
        "grid": f"{pairs} leaf pairs x {stations} stations on |x| <= {window:.4g}, |da| = {spacing:g}",
        "notes": [SAMPLED_SUP_NOTE, C_IDENTIFICATION_NOTE],
    }
    reports = [
        BoundReport.from_pointwise("leaf-separation-lower", lower_env[finite], gap[finite], xs=x_grid[finite], **common),
        BoundReport.from_pointwise("leaf-separation-upper", gap[finite], upper_env[finite], xs=x_grid[finite], **common),
        BoundReport.from_pointwise("leaf-separation-rate", rate[finite], rate_bound[finite], **common),
    ]
    lost = int(np.count_nonzero(~finite))
    if lost:
        for report in reports:
            report.notes.append(f"{lost} sample(s) where a leaf left the box")
    return reports


def check_pi_delta_roundtrip(
    projection: SmoothProjection,
    disk: Domain,
    rng: np.random.Generator,
    samples: int = 1000,
) -> BoundReport:
    """|pi_delta(x, f_a^delta(x)) - a| against ten times the integrator tolerance."""
    sf = projection.sf
    a = np.column_stack([rng.uniform(*disk.interval(axis), samples) for axis in (1, 2)])
    x = rng.uniform(*disk.interval(0), samples)
    y = integrate_approx_leaf(sf, a, x, projection.integrator, on_exit="nan")
    kept = np.isfinite(y).all(axis=1)
    back = projection.values(x[kept], y[kept, 0], y[kept, 1])
    err = np.linalg.norm(back - a[kept], axis=1)
    err = err[np.isfinite(err)]
    report = BoundReport.from_pointwise(
        "pi-delta-roundtrip",
        err,
        10.0 * projection.tol,
        suite=SUITE,
        params=_params(sf, R=disk.radius),
        grid=f"{samples} random (a, x) over D_R",
        notes=[SAMPLED_SUP_NOTE],
    )
    if err.size < samples:
        report.notes.append(f"{samples - err.size} sample(s) left the box")
    return report


def pi_delta_error(projection: SmoothProjection, family: CurveFamily3D, disk: Domain, n: int = 9) -> float:
    """sup over an n-grid of D_R of |pi_delta - pi|, pi from the true leaves."""
    coords = disk.grid(n)
    approx = projection(*coords)
    exact = project_pi(family, *coords)
    return float(np.max(np.linalg.norm(approx - exact, axis=-1)))


def final_bound(sf: SmoothedField) -> float:
    return 2.0 * sf.C * np.sqrt(sf.delta) * np.log(1.0 / sf.delta)


def measure_final(projection: SmoothProjection, family: CurveFamily3D, disk: Domain, n: int = 9) -> tuple[FloatArray, FloatArray]:
    """
    Leafwise derivative |d/dx pi_delta(x, f_a(x))| along the true leaves through
    an n-grid of D_R, shrunk slightly so the stencil stays inside.

    Returns:
        xs, deriv: Abscissae and derivative norms.
    """
    inner = disk.interior(0.05)
    x, y1, y2 = inner.grid(n)
    a = project_pi(family, x, y1, y2)
    h = min(1e-3, 0.01 * disk.width(0))
    deriv = projection.leafwise_derivative(family, a[:, 0], a[:, 1], x, h=h)
    return x, np.linalg.norm(deriv, axis=1)


def check_grad_pi_and_final(
    projection: SmoothProjection, family: CurveFamily3D, disk: Domain, n: int = 9
) -> list[BoundReport]:
    """
    (a) sup |grad_y pi_delta| <= 2 / sqrt(delta) over D_R and (b) the leafwise
    derivative of pi_delta along true leaves <= 2 C sqrt(delta) log(1/delta).
    """
    sf = projection.sf
    R = 0.5 * disk.width(0)
    if sf.C * R > 0.5 + 1e-12:
        raise DomainError(f"{projection}: C R = {sf.C * R:.3g} exceeds 1/2")
    inner = disk.interior(0.05)
    grad = projection.grad_norm(*inner.grid(n))
    xs, deriv = measure_final(projection, family, disk, n)
    common = {
        "suite": SUITE,
        "params": _params(sf, R=disk.radius),
        "grid": f"{n}^3 grid over D_R",
        "notes": [SAMPLED_SUP_NOTE],
    }
    return [
        BoundReport.from_pointwise("grad-pi", grad, 2.0 / np.sqrt(sf.delta), **common),
        BoundReport.from_pointwise("final-bound", deriv, final_bound(sf), xs=xs, **common),
    ]
