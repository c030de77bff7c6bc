from __future__ import annotations
import logging
from typing import Optional

import numpy as np

from flow.mollifier import BumpKernel, BumpLambda, mollified_values, mollify_strand, strand_distance
from lamination.domain import Domain
from lamination.slope_field import SlopeField3D
from report.bound_report import BoundReport, SAMPLED_SUP_NOTE
from util.errors import ConstructionError, DomainError
from util.types import ArrayLike, FloatArray

logger = logging.getLogger(__name__)

DEFAULT_DELTA0 = 0.25
# Points per evaluation chunk; each point costs four strands times the quadrature order
CHUNK = 16_384


def _node_weights(y: FloatArray, delta: float):
    """
    Active nodes and blend weights along one transversal axis.

    Returns:
        m0, w0, w1, dw: Lower node index, weights of nodes m0 and m0 + 1, and
            d w1 / dy (d w0 / dy = -dw).
    """
    scaled = y / delta
    m0 = np.floor(scaled)
    frac = scaled - m0
    w0 = np.cos(0.5 * np.pi * frac) ** 2
    w1 = np.sin(0.5 * np.pi * frac) ** 2
    dw = (0.5 * np.pi / delta) * np.sin(np.pi * frac)
    return m0, w0, w1, dw


def proof_constant(delta: float, L: float) -> tuple[float, float]:
    """
    Constants that make the construction's estimates hold for a log-Lipschitz F:
    4 delta + 8 L delta log(1/(2 delta)) <= C delta log(1/delta) for the sup error, and
    2 sqrt(2) (3 pi / 2) (2 + sqrt(2) L log(1/(sqrt(2) delta))) <= C log(1/delta) for the Jacobian.
    """
    log_inv = np.log(1.0 / delta)
    c_sup = (4.0 + 8.0 * L * np.log(1.0 / (2.0 * delta))) / log_inv
    c_jac = (
        2.0 * np.sqrt(2.0) * 1.5 * np.pi
        * (2.0 + np.sqrt(2.0) * L * np.log(1.0 / (np.sqrt(2.0) * delta)))
        / log_inv
    )
    return float(c_sup), float(c_jac)


class SmoothedField:
    """
    F_delta(x, y) = sum_{m,n} Lambda(pi (y1 - m delta) / 2 delta) Lambda(pi (y2 - n delta) / 2 delta) F_mn(x),
    with F_mn the mollified strands through the grid nodes (m delta, n delta).

    Strands are not stored: each evaluation convolves the four active strands on
    the fly with the common kernel width chosen at build time.
    """

    def __init__(
        self,
        field: SlopeField3D,
        delta: float,
        box: Domain,
        width: float,
        kernel: BumpKernel,
        L: float,
        strand_distance: float,
    ):
        self.field = field
        self.delta = float(delta)
        self.box = box
        self.width = width
        self.kernel = kernel
        self.L = L
        self.strand_distance = strand_distance
        self.C_proof = max(proof_constant(self.delta, L))
        self.C_fit = 0.0
        self.C = self.C_proof
        self.dominant = "proof"

    def __str__(self):
        return f"SmoothedField.{self.field.name}{{delta={self.delta:g}}}"

    def _strand(self, x: FloatArray, m: FloatArray, n: FloatArray) -> FloatArray:
        return mollified_values(
            self.field, x, (m * self.delta)[:, None], (n * self.delta)[:, None], self.width, self.kernel
        )

    def _blend(self, x: FloatArray, y1: FloatArray, y2: FloatArray, jacobian: bool):
        m0, a0, a1, da = _node_weights(y1, self.delta)
        n0, b0, b1, db = _node_weights(y2, self.delta)
        value = np.zeros(x.shape + (2,))
        d1 = np.zeros(x.shape + (2,))
        d2 = np.zeros(x.shape + (2,))
        for m, wm, dwm in ((m0, a0, -da), (m0 + 1, a1, da)):
            for n, wn, dwn in ((n0, b0, -db), (n0 + 1, b1, db)):
                strand = self._strand(x, m, n)
                value += (wm * wn)[:, None] * strand
                if jacobian:
                    d1 += (dwm * wn)[:, None] * strand
                    d2 += (wm * dwn)[:, None] * strand
        if jacobian:
            return value, np.stack([d1, d2], axis=-1)
        return value, None

    def _chunked(self, x, y1, y2, jacobian: bool):
        x, y1, y2 = (
            np.ravel(v)
            for v in np.broadcast_arrays(
                np.asarray(x, dtype=float), np.asarray(y1, dtype=float), np.asarray(y2, dtype=float)
            )
        )
        values, jacs = [], []
        for start in range(0, max(x.size, 1), CHUNK):
            sl = slice(start, start + CHUNK)
            value, jac = self._blend(x[sl], y1[sl], y2[sl], jacobian)
            values.append(value)
            jacs.append(jac)
        value = np.concatenate(values) if values else np.zeros((0, 2))
        if jacobian:
            return value, np.concatenate(jacs)
        return value

    def __call__(self, x: ArrayLike, y1: ArrayLike, y2: ArrayLike) -> FloatArray:
        """F_delta at a batch of points; returns (n, 2)."""
        return self._chunked(x, y1, y2, jacobian=False)

    def rhs(self, x: FloatArray, y: FloatArray) -> FloatArray:
        return self(x, y[:, 0], y[:, 1])

    def jacobian_y(self, x: ArrayLike, y1: ArrayLike, y2: ArrayLike) -> FloatArray:
        """Analytic transversal Jacobian J_y F_delta; returns (n, 2, 2) with [:, i, j] = dF_i/dy_j."""
        return self._chunked(x, y1, y2, jacobian=True)[1]

    def to_dict(self):
        return {
            "field": self.field.name,
            "delta": self.delta,
            "width": self.width,
            "C": self.C,
            "C_proof": self.C_proof,
            "C_fit": self.C_fit,
            "dominant": self.dominant,
            "strand_distance": self.strand_distance,
        }


def _node_range(interval, delta: float) -> tuple[int, int]:
    lo, hi = interval
    return int(np.floor(lo / delta)) - 1, int(np.ceil(hi / delta)) + 1


def _probe_nodes(box: Domain, delta: float, rng: np.random.Generator, probes: int) -> list[tuple[int, int]]:
    m_lo, m_hi = _node_range(box.interval(1), delta)
    n_lo, n_hi = _node_range(box.interval(2), delta)
    ms, ns = np.arange(m_lo, m_hi + 1), np.arange(n_lo, n_hi + 1)
    total = ms.size * ns.size
    if total <= probes:
        return [(int(m), int(n)) for m in ms for n in ns]
    corners = [(m_lo, n_lo), (m_lo, n_hi), (m_hi, n_lo), (m_hi, n_hi)]
    picks = rng.choice(total, size=probes - len(corners), replace=False)
    return corners + [(int(ms[i // ns.size]), int(ns[i % ns.size])) for i in np.sort(picks)]


def measure_field_errors(sf: SmoothedField, coords: tuple[FloatArray, ...]) -> tuple[FloatArray, FloatArray]:
    """Pointwise |F_delta - F| and spectral norm of the analytic J_y F_delta."""
    x, y1, y2 = coords
    err = np.linalg.norm(sf(x, y1, y2) - sf.field(x, y1, y2), axis=-1)
    jac = np.linalg.norm(sf.jacobian_y(x, y1, y2), ord=2, axis=(1, 2))
    return err, jac


def build_F_delta(
    field: SlopeField3D,
    delta: float,
    box: Domain,
    L: float,
    rng: np.random.Generator,
    delta0: float = DEFAULT_DELTA0,
    probes: int = 256,
    quadrature: int = 32,
    strand_samples: int = 2001,
    fit_grid: int = 8,
) -> SmoothedField:
    """
    Grid mollification of a log-Lipschitz slope field.

    A common kernel width is found by halving until every probed strand is
    within delta of its mollification; all strands when there are at most
    `probes` of them, otherwise a seeded subsample plus the four corners.
    The constant C is the larger of the proof constant and a fit of the
    measured errors on a small grid; which one dominated is recorded.

    Args:
        field (SlopeField3D): The slope field F.
        delta (float): Grid spacing, 0 < delta < delta0.
        box (Domain): Box (x, y1, y2); grid nodes cover it plus one ring.
        L (float): Log-Lipschitz constant of F.
        rng (np.random.Generator): Chooses probe strands.
    """
    if not 0 < delta < delta0:
        raise DomainError(f"{field}: delta must lie in (0, {delta0:g}), got {delta:g}")
    kernel = BumpKernel(quadrature)
    x_range = box.interval(0)
    nodes = _probe_nodes(box, delta, rng, probes)

    width = None
    for m, n in nodes:
        strand = mollify_strand(field, m, n, delta, x_range, kernel, strand_samples, width)
        width = strand.width if width is None else min(width, strand.width)

    xs = np.linspace(*x_range, strand_samples)
    while True:
        distances = [strand_distance(field, m, n, delta, width, xs, kernel) for m, n in nodes]
        worst = int(np.argmax(distances))
        if distances[worst] < delta:
            break
        width *= 0.5
        if width < 1e-12:
            raise ConstructionError(
                f"{field}: no common kernel width reaches {delta:g}", worst=nodes[worst]
            )

    sf = SmoothedField(field, delta, box, width, kernel, L, max(distances))
    coords = box.grid(fit_grid)
    err, jac = measure_field_errors(sf, coords)
    log_inv = np.log(1.0 / delta)
    sf.C_fit = float(max(err.max() / (delta * log_inv), 2.0 * jac.max() / log_inv))
    if sf.C_fit > sf.C_proof:
        sf.C, sf.dominant = sf.C_fit, "fit"
    logger.info(
        f"{sf}: kernel width {width:.3g} over {len(nodes)} probe strands, "
        f"C={sf.C:.4g} ({sf.dominant} dominated; proof {sf.C_proof:.4g}, fit {sf.C_fit:.4g})",
        extra={"mollified": sf.to_dict()},
    )
    return sf


def check_lemma3(sf: SmoothedField, n: int = 64, slack: float = 0.0) -> list[BoundReport]:
    """
    (i) sup |F_delta - F| <= C delta log(1/delta) and (ii) sup |J_y F_delta| <= (C/2) log(1/delta),
    the Jacobian measured by central differences in y1 and y2.
    """
    coords = sf.box.grid(n)
    x, y1, y2 = coords
    err = np.linalg.norm(sf(x, y1, y2) - sf.field(x, y1, y2), axis=-1)

    h = max(1e-6, sf.delta / 100)
    cols = []
    for shift in ((h, 0.0), (0.0, h)):
        up = sf(x, y1 + shift[0], y2 + shift[1])
        down = sf(x, y1 - shift[0], y2 - shift[1])
        cols.append((up - down) / (2.0 * h))
    jac = np.linalg.norm(np.stack(cols, axis=-1), ord=2, axis=(1, 2))

    log_inv = np.log(1.0 / sf.delta)
    common = {
        "slack": slack,
        "suite": "curve",
        "params": {"family": sf.field.name, "delta": sf.delta, "C": sf.C, "L": sf.L},
        "grid": f"{n}^3 grid over the box",
        "notes": [SAMPLED_SUP_NOTE, f"C {sf.dominant} dominated"],
    }
    return [
        BoundReport("lemma3-i", float(err.max()), sf.C * sf.delta * log_inv, **common),
        BoundReport("lemma3-ii", float(jac.max()), 0.5 * sf.C * log_inv, **common),
    ]


def check_blend_weights(delta: float, rng: np.random.Generator, samples: int = 10_000, box: Optional[Domain] = None) -> BoundReport:
    """The four active products Lambda(.) Lambda(.) sum to 1 at every sampled y."""
    bump = BumpLambda()
    if box is None:
        y1 = rng.uniform(0.0, 1.0, samples)
        y2 = rng.uniform(0.0, 1.0, samples)
    else:
        y1 = rng.uniform(*box.interval(1), samples)
        y2 = rng.uniform(*box.interval(2), samples)
    m0 = np.floor(y1 / delta)
    n0 = np.floor(y2 / delta)
    total = np.zeros(samples)
    for m in (m0, m0 + 1):
        for n in (n0, n0 + 1):
            total += bump(np.pi * (y1 - m * delta) / (2 * delta)) * bump(np.pi * (y2 - n * delta) / (2 * delta))
    return BoundReport.from_pointwise(
        "blend-weights",
        np.abs(total - 1.0),
        1e-12,
        suite="curve",
        params={"delta": delta},
        grid=f"{samples} random y",
        notes=[SAMPLED_SUP_NOTE],
    )
