"""
Estimation and checking of the log-Lipschitz (Osgood) constant L, plus the
basic checks on families that the smoothing constructions take for granted.
"""

from __future__ import annotations
import logging
from typing import Callable, Optional

import numpy as np

from lamination.domain import Domain
from lamination.family import CurveFamily3D, LeafFamily, ScalarLeafFamily, SurfaceFamily3D
from lamination.ode import Rk4Integrator, family_from_slope_field
from lamination.projection import project_pi
from lamination.slope_field import SlopeField, field_values
from report.bound_report import BoundReport, SAMPLED_SUP_NOTE
from util.errors import SamplingInputError
from util.numerics import log_modulus
from util.types import FloatArray

logger = logging.getLogger(__name__)

# Smallest L with L log 2 > 1, rounded up
L_FLOOR = 1.45
MIN_SEPARATION = 1e-6
MAX_SEPARATION = 0.5

# (base coordinates..., transversal states (n, k)) -> slopes (n, m)
type SlopeSource = Callable[[list[FloatArray], FloatArray], FloatArray]


class LogLipschitzEstimate:
    def __init__(self, L: float, samples: int, witness: Optional[tuple] = None):
        """
        Args:
            L (float): Largest sampled ratio |F(y') - F(y)| / (|y' - y| log(1/|y' - y|)).
            samples (int): Number of valid pairs.
            witness (Optional[tuple]): (base, y, y') of the worst pair.
        """
        self.L = float(L)
        self.samples = samples
        self.witness = witness

    @property
    def L_effective(self) -> float:
        return max(self.L, L_FLOOR)

    def __str__(self):
        return f"LogLipschitzEstimate{{L={self.L:.6g}, L_eff={self.L_effective:.6g}, n={self.samples}}}"


def slope_source(source: SlopeField | LeafFamily) -> tuple[SlopeSource, int, str]:
    """
    Normalizes a slope field or a family into a function of (base, transversal).

    Returns:
        source, base_dim, norm: norm is "euclidean" for vector slopes and "max"
            for the pair of partial slopes of a surface family.
    """
    if hasattr(source, "rhs"):
        return (lambda base, y: field_values(source, base[0], y)), 1, "euclidean"

    if isinstance(source, SurfaceFamily3D):

        def surface(base, z):
            a = project_pi(source, *base, z[:, 0])
            return np.column_stack(source.slopes(a, *base))

        return surface, 2, "max"

    if isinstance(source, CurveFamily3D):

        def curve(base, y):
            a = project_pi(source, base[0], y[:, 0], y[:, 1])
            return source.slope(a[:, 0], a[:, 1], base[0])

        return curve, 1, "euclidean"

    def planar(base, y):
        a = project_pi(source, base[0], y[:, 0])
        return source.slope(a, base[0])[:, None]

    return planar, 1, "euclidean"


def _pairs(
    domain: Domain, base_dim: int, rng: np.random.Generator, samples: int
) -> tuple[list[FloatArray], FloatArray, FloatArray]:
    """Random plus structured pairs (y, y') at equal base with separation in [1e-6, 1/2]."""
    trans_axes = range(base_dim, domain.dimension)
    k = len(trans_axes)

    # Random part: log-uniform separations along random directions
    base = [rng.uniform(*domain.interval(axis), samples) for axis in range(base_dim)]
    y = np.column_stack([rng.uniform(*domain.interval(axis), samples) for axis in trans_axes])
    t = np.exp(rng.uniform(np.log(MIN_SEPARATION), np.log(MAX_SEPARATION), samples))
    direction = rng.normal(size=(samples, k))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    y_prime = y + t[:, None] * direction

    # Structured part: axis-aligned steps from a grid, including t = 1/2 from the lower face
    m = max(2, int(round(samples ** (1.0 / (base_dim + 2)))))
    ts = np.geomspace(MIN_SEPARATION, MAX_SEPARATION, m)
    grids = [np.linspace(*domain.interval(axis), m) for axis in range(domain.dimension)]
    mesh = np.meshgrid(*grids, ts, indexing="ij")
    flat = [g.ravel() for g in mesh]
    g_base, g_y, g_t = flat[:base_dim], np.column_stack(flat[base_dim:-1]), flat[-1]
    axis_steps = []
    for axis in range(k):
        step = np.zeros((len(g_t), k))
        step[:, axis] = g_t
        axis_steps.append(step)
    g_y = np.concatenate([g_y] * k)
    g_y_prime = g_y + np.concatenate(axis_steps)
    g_base = [np.concatenate([b] * k) for b in g_base]

    base = [np.concatenate([b, gb]) for b, gb in zip(base, g_base)]
    y = np.concatenate([y, g_y])
    y_prime = np.concatenate([y_prime, g_y_prime])

    inside = np.ones(len(y), dtype=bool)
    for col, axis in enumerate(trans_axes):
        lo, hi = domain.interval(axis)
        inside &= (y_prime[:, col] >= lo) & (y_prime[:, col] <= hi)
    return [b[inside] for b in base], y[inside], y_prime[inside]


def _ratios(
    source: SlopeSource, norm: str, base: list[FloatArray], y: FloatArray, y_prime: FloatArray
) -> FloatArray:
    sep = np.linalg.norm(y_prime - y, axis=1)
    valid = (sep > MIN_SEPARATION * (1 - 1e-9)) & (sep <= MAX_SEPARATION * (1 + 1e-12))
    diff = source(base, y_prime) - source(base, y)
    if norm == "max":
        num = np.max(np.abs(diff), axis=1)
    else:
        num = np.linalg.norm(diff, axis=1)
    ratio = np.full(len(sep), np.nan)
    ratio[valid] = num[valid] / log_modulus(np.minimum(sep[valid], MAX_SEPARATION))
    return ratio


def estimate_log_lipschitz_L(
    source: SlopeField | LeafFamily,
    domain: Domain,
    rng: np.random.Generator,
    samples: int = 10_000,
) -> LogLipschitzEstimate:
    """
    Sup over sampled pairs of |F(x, y') - F(x, y)| / (|y' - y| log(1/|y' - y|)).

    Coincident pairs are skipped.

    Args:
        source (SlopeField | LeafFamily): A slope field, or a family whose slopes
            define one (partial slopes for surfaces).
        domain (Domain): Box the pairs are drawn from.
        samples (int): Number of random pairs; a structured grid is added on top.
    """
    evaluate, base_dim, norm = slope_source(source)
    base, y, y_prime = _pairs(domain, base_dim, rng, samples)
    ratio = _ratios(evaluate, norm, base, y, y_prime)
    valid = np.isfinite(ratio)
    if not np.any(valid):
        raise SamplingInputError(f"{source}: no valid sample pairs in {domain}")
    worst = int(np.nanargmax(ratio))
    estimate = LogLipschitzEstimate(
        ratio[worst],
        int(np.count_nonzero(valid)),
        witness=(tuple(b[worst] for b in base), y[worst], y_prime[worst]),
    )
    logger.info(f"{source}: {estimate}")
    return estimate


def check_basic_assumption(
    source: SlopeField | LeafFamily,
    domain: Domain,
    L: float,
    rng: np.random.Generator,
    samples: int = 10_000,
    slack: float = 1e-9,
) -> BoundReport:
    """
    Worst sampled log-Lipschitz ratio against a declared L; passes iff the ratio
    is at most L (1 + slack).
    """
    if L <= 0:
        raise ValueError(f"{source}: L must be positive, got {L}")
    estimate = estimate_log_lipschitz_L(source, domain, rng, samples)
    return BoundReport(
        "basic-assumption",
        estimate.L,
        L * (1.0 + slack),
        suite="assumption",
        params={"L": L},
        grid=f"{estimate.samples} pairs, separations in [{MIN_SEPARATION:g}, {MAX_SEPARATION:g}]",
        notes=[SAMPLED_SUP_NOTE],
    )


def check_lemma1(
    family: ScalarLeafFamily,
    L: float,
    rng: np.random.Generator,
    samples: int = 10_000,
    delta_max: float = 0.25,
    slack: float = 1e-6,
) -> list[BoundReport]:
    """
    Two-sided leaf-gap envelope e^{-L|x|} log(1/d) <= log(1/(f_{a+d}(x) - f_a(x))) <= e^{L|x|} log(1/d).

    Separations d are log-uniform in [1e-6, delta_max].

    Returns:
        reports (list[BoundReport]): Lower and upper envelope.
    """
    lo, hi = family.param_range
    d = np.exp(rng.uniform(np.log(MIN_SEPARATION), np.log(delta_max), samples))
    a = rng.uniform(lo, hi - d)
    x = rng.uniform(*family.domain.interior().interval(0), samples)
    gap = family.evaluate(a + d, x) - family.evaluate(a, x)
    usable = (gap > 0) & (gap < 1)
    x, d, gap = x[usable], d[usable], gap[usable]

    log_gap = np.log(1.0 / gap)
    log_d = np.log(1.0 / d)
    common = {
        "slack": slack,
        "suite": "assumption",
        "params": {"family": family.name, "L": L},
        "grid": f"{np.count_nonzero(usable)} random (a, a+d, x), d <= {delta_max:g}",
        "notes": [SAMPLED_SUP_NOTE],
    }
    return [
        BoundReport.from_pointwise(
            "lemma1-lower", np.exp(-L * np.abs(x)) * log_d, log_gap, xs=x, **common
        ),
        BoundReport.from_pointwise(
            "lemma1-upper", log_gap, np.exp(L * np.abs(x)) * log_d, xs=x, **common
        ),
    ]


def check_monotone_ordering(
    family: LeafFamily, rng: np.random.Generator, samples: int = 1000
) -> BoundReport:
    """
    Strict ordering a < a' => f_a < f_a' on random triples (componentwise in each
    parameter for curves in R^3). Measured is the largest f_a - f_a', which must be negative.
    """
    inner = family.domain.interior()
    base = [rng.uniform(*inner.interval(axis), samples) for axis in range(family.base_dim)]
    if isinstance(family, CurveFamily3D):
        a = [rng.uniform(lo, hi, samples) for lo, hi in family.param_box]
        worst = []
        for comp, (lo, hi) in enumerate(family.param_box):
            a_prime = list(a)
            a_prime[comp] = a[comp] + rng.uniform(0, hi - a[comp])
            lower = family.evaluate(*a, *base)[:, comp]
            upper = family.evaluate(*a_prime, *base)[:, comp]
            worst.append(lower - upper)
        measured = np.concatenate(worst)
    else:
        pair = np.sort(rng.uniform(*family.param_range, (2, samples)), axis=0)
        measured = family.evaluate(pair[0], *base) - family.evaluate(pair[1], *base)
        measured = measured[pair[0] < pair[1]]
    return BoundReport.from_pointwise(
        "monotone-ordering",
        measured,
        0.0,
        strict=True,
        suite="assumption",
        params={"family": family.name},
        grid=f"{samples} random triples",
    )


def check_projection_roundtrip(
    family: LeafFamily,
    rng: np.random.Generator,
    samples: int = 1000,
    tol: float = 1e-9,
) -> BoundReport:
    """|f_{pi(p)}(base) - p| on random covered points of the family's box."""
    inner = family.domain.interior()
    coords = inner.sample(rng, samples * 4)
    a = project_pi(family, *coords, on_uncovered="nan")
    if isinstance(family, CurveFamily3D):
        covered = np.isfinite(a).all(axis=-1)
    else:
        covered = np.isfinite(a)
    idx = np.flatnonzero(covered)[:samples]
    coords = [c[idx] for c in coords]
    a = a[idx]
    if isinstance(family, CurveFamily3D):
        back = family.evaluate(a[:, 0], a[:, 1], coords[0], strict=False)
        err = np.linalg.norm(back - np.column_stack(coords[1:]), axis=1)
    else:
        back = family.evaluate(a, *coords[:-1], strict=False)
        err = np.abs(back - coords[-1])
    return BoundReport.from_pointwise(
        "projection-roundtrip",
        err,
        tol,
        suite="assumption",
        params={"family": family.name},
        grid=f"{idx.size} covered random points",
        notes=[SAMPLED_SUP_NOTE],
    )


def check_ode_oracle(
    field: SlopeField,
    family: LeafFamily,
    integrator: Rk4Integrator,
    leaves: int = 100,
    x_max: float = 2.0,
    stations: int = 401,
    tol: float = 1e-8,
) -> BoundReport:
    """
    Integrates the leaves of `field` and compares them with the closed-form family.

    Leaves start on a grid of parameters inside the family's range; values after
    a leaf leaves the box are not compared.
    """
    x_lo, x_hi = family.domain.interval(0)
    xs = np.linspace(max(-x_max, x_lo), min(x_max, x_hi), stations)
    ode_family = family_from_slope_field(field, family.domain, integrator)

    if isinstance(family, CurveFamily3D):
        side = max(2, int(np.ceil(np.sqrt(leaves))))
        (l1, h1), (l2, h2) = family.param_box
        g1, g2 = np.meshgrid(
            np.linspace(l1, h1, side + 2)[1:-1], np.linspace(l2, h2, side + 2)[1:-1], indexing="ij"
        )
        params = np.column_stack([g1.ravel(), g2.ravel()])[:leaves]
        cached = ode_family.cache.leaves_for([(float(a1), float(a2)) for a1, a2 in params])
        errors = []
        for (a1, a2), values in zip(params, cached):
            exact = family.evaluate(a1, a2, xs, strict=False)
            valid = (xs >= values.x_range[0]) & (xs <= values.x_range[1])
            errors.append(np.linalg.norm(values(xs[valid]) - exact[valid], axis=-1))
    else:
        lo, hi = family.param_range
        params = np.linspace(lo, hi, leaves + 2)[1:-1]
        cached = ode_family.cache.leaves_for([(float(a),) for a in params])
        errors = []
        for a, values in zip(params, cached):
            exact = family.evaluate(a, xs, strict=False)
            valid = (xs >= values.x_range[0]) & (xs <= values.x_range[1])
            errors.append(np.abs(values(xs[valid])[:, 0] - exact[valid]))
    err = np.concatenate(errors)
    return BoundReport.from_pointwise(
        "ode-oracle",
        err,
        tol,
        suite="assumption",
        params={"family": family.name},
        grid=f"{len(params)} leaves x {stations} stations, |x| <= {x_max:g}",
        notes=[SAMPLED_SUP_NOTE, f"{err.size} compared values"],
    )
