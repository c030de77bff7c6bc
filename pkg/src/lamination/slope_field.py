from __future__ import annotations
import logging
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from lamination.domain import Domain
from lamination.family import CurveFamily3D, LeafFamily2D
from report.bound_report import BoundReport, SAMPLED_SUP_NOTE
from util.errors import ConfigError, SamplingInputError
from util.types import ArrayLike, FloatArray

logger = logging.getLogger(__name__)

# Jumps larger than this between points 1e-6 apart are reported as discontinuities
CONTINUITY_WARN = 1e-3


class SlopeField2D:
    """The common slope F(x, y) = f_a'(x) on y = f_a(x)."""

    dimension = 2

    def __init__(
        self,
        name: str,
        evaluator: Callable[[FloatArray, FloatArray], FloatArray],
        extent: Optional[Domain] = None,
    ):
        self.name = name
        self._evaluator = evaluator
        # Box the field is known on, when it comes from samples
        self.extent = extent

    def __str__(self):
        return f"SlopeField2D.{self.name}"

    def __call__(self, x: ArrayLike, y: ArrayLike) -> FloatArray:
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return np.asarray(self._evaluator(x, y), dtype=float) + np.zeros(x.shape)

    def rhs(self, x: FloatArray, y: FloatArray) -> FloatArray:
        """ODE right-hand side over a state of shape (n, 1)."""
        return self(x, y[:, 0])[:, None]


class SlopeField3D:
    """F(x, y1, y2) = df_a/dx on the curve y = f_a(x) in R^3; values stacked (..., 2)."""

    dimension = 3

    def __init__(self, name: str, evaluator: Callable[..., FloatArray], extent: Optional[Domain] = None):
        self.name = name
        self._evaluator = evaluator
        self.extent = extent

    def __str__(self):
        return f"SlopeField3D.{self.name}"

    def __call__(self, x: ArrayLike, y1: ArrayLike, y2: ArrayLike) -> FloatArray:
        x, y1, y2 = np.broadcast_arrays(
            np.asarray(x, dtype=float), np.asarray(y1, dtype=float), np.asarray(y2, dtype=float)
        )
        out = np.asarray(self._evaluator(x, y1, y2), dtype=float)
        return np.broadcast_to(out, x.shape + (2,)).copy()

    def rhs(self, x: FloatArray, y: FloatArray) -> FloatArray:
        return self(x, y[:, 0], y[:, 1])


type SlopeField = SlopeField2D | SlopeField3D


def field_values(field: SlopeField, x: FloatArray, y: FloatArray) -> FloatArray:
    """Evaluates any field on transversal states of shape (n, k), returning (n, k)."""
    return field.rhs(np.asarray(x, dtype=float), np.asarray(y, dtype=float))


def probe_continuity(
    field: SlopeField,
    domain: Domain,
    rng: np.random.Generator,
    samples: int = 1000,
    step: float = 1e-6,
) -> float:
    """
    Looks for jumps of F between nearby points. Only warns; never gates construction.

    Returns:
        worst (float): Largest |F(p + h) - F(p)| seen.
    """
    inner = domain.interior()
    coords = inner.sample(rng, samples)
    offsets = rng.uniform(-step, step, (len(coords), samples))
    shifted = [c + o for c, o in zip(coords, offsets)]
    x, y = coords[0], np.column_stack(coords[1:])
    xs, ys = shifted[0], np.column_stack(shifted[1:])
    jump = np.linalg.norm(field_values(field, xs, ys) - field_values(field, x, y), axis=-1)
    worst = float(np.max(jump))
    if worst > CONTINUITY_WARN:
        logger.warning(f"{field}: jump of {worst:.3g} between points {step:g} apart")
    return worst


def check_slope_consistency(
    field: SlopeField,
    family: LeafFamily2D | CurveFamily3D,
    rng: np.random.Generator,
    samples: int = 1000,
    tol: float = 1e-9,
) -> BoundReport:
    """
    Compares F(x, f_a(x)) with the family's own slope evaluator.

    Args:
        field (SlopeField): The slope field.
        family (LeafFamily2D | CurveFamily3D): A family with analytic slopes.
        tol (float): Allowed discrepancy.
    """
    inner = family.domain.interior()
    x = rng.uniform(*inner.interval(0), samples)
    if isinstance(family, CurveFamily3D):
        a1 = rng.uniform(*family.param_box[0], samples)
        a2 = rng.uniform(*family.param_box[1], samples)
        leaf = family.evaluate(a1, a2, x)
        expected = family.slope(a1, a2, x)
        got = field(x, leaf[:, 0], leaf[:, 1])
        err = np.linalg.norm(got - expected, axis=-1)
    else:
        a = rng.uniform(*family.param_range, samples)
        leaf = family.evaluate(a, x)
        err = np.abs(field(x, leaf) - family.slope(a, x))
    return BoundReport.from_pointwise(
        "slope-consistency",
        err,
        tol,
        suite="assumption",
        params={"family": family.name},
        grid=f"{samples} random (a, x)",
        notes=[SAMPLED_SUP_NOTE],
    )


def load_sampled_field(path: str) -> SlopeField:
    """
    Reads a sampled slope field.

    The file starts with a header line "nx ny1 ny2" followed by nx*ny1*ny2 rows
    "x y1 y2 F1 F2" ordered with x slowest and y2 fastest. ny2 == 1 gives a
    planar field whose slope is F1. Values are interpolated multilinearly.

    Args:
        path (str): Text file.
    Returns:
        field (SlopeField): SlopeField2D when ny2 == 1, else SlopeField3D.
    """
    with open(path, "r") as f:
        lines = [(n, line.split()) for n, line in enumerate(f, start=1)]
    lines = [(n, parts) for n, parts in lines if parts and not parts[0].startswith("#")]
    if not lines:
        raise ConfigError("sampled field file is empty", field=path)

    header_line, header = lines[0]
    try:
        nx, ny1, ny2 = (int(v) for v in header)
    except ValueError as e:
        raise ConfigError("header must be three integers nx ny1 ny2", field=path, line=header_line) from e
    if min(nx, ny1) < 2 or ny2 < 1:
        raise ConfigError("need at least two nodes along x and y1", field=path, line=header_line)

    rows = []
    for n, parts in lines[1:]:
        if len(parts) != 5:
            raise ConfigError("expected five columns x y1 y2 F1 F2", field=path, line=n)
        try:
            rows.append([float(v) for v in parts])
        except ValueError as e:
            raise ConfigError(f"non-numeric value: {e}", field=path, line=n) from e
    data = np.array(rows)
    if data.shape[0] != nx * ny1 * ny2:
        raise SamplingInputError(
            f"{path}: header announces {nx * ny1 * ny2} rows, found {data.shape[0]}"
        )

    grid = data.reshape(nx, ny1, ny2, 5)
    xs = grid[:, 0, 0, 0]
    y1s = grid[0, :, 0, 1]
    name = f"slope-field:{path}"
    if ny2 == 1:
        interp = RegularGridInterpolator(
            (xs, y1s), grid[:, :, 0, 3], bounds_error=False, fill_value=None
        )

        def planar(x, y):
            pts = np.stack([np.ravel(x), np.ravel(y)], axis=-1)
            return interp(pts).reshape(np.shape(x))

        return SlopeField2D(name, planar, Domain([(xs[0], xs[-1]), (y1s[0], y1s[-1])]))

    y2s = grid[0, 0, :, 2]
    interp = RegularGridInterpolator(
        (xs, y1s, y2s), grid[..., 3:5], bounds_error=False, fill_value=None
    )

    def spatial(x, y1, y2):
        pts = np.stack([np.ravel(x), np.ravel(y1), np.ravel(y2)], axis=-1)
        return interp(pts).reshape(np.shape(x) + (2,))

    return SlopeField3D(name, spatial, Domain([(xs[0], xs[-1]), (y1s[0], y1s[-1]), (y2s[0], y2s[-1])]))
