from __future__ import annotations
import logging
import threading
from typing import Optional

import numpy as np

from lamination.domain import Domain, SURFACE_AXES
from lamination.family import CurveFamily3D, LeafFamily, LeafFamily2D, SurfaceFamily3D
from lamination.log_lipschitz import estimate_log_lipschitz_L
from lamination.ode import Rk4Integrator, family_from_slope_field
from lamination.slope_field import SlopeField, SlopeField2D, SlopeField3D, load_sampled_field, probe_continuity
from util.errors import ConfigError
from util.numerics import x_log_inv_abs

logger = logging.getLogger(__name__)

SLOPE_FIELD_PREFIX = "slope-field:"

# Kinds select which suites an entry can run
CURVE2D = "curve2d"
SURFACE = "surface"
CURVE3D = "curve3d"


class CatalogEntry:
    """One named lamination together with everything the checks need to know about it."""

    def __init__(
        self,
        name: str,
        kind: str,
        family: LeafFamily,
        domain: Domain,
        K: Domain,
        L: float,
        field: Optional[SlopeField] = None,
        planar: Optional[str] = None,
    ):
        """
        Creates a CatalogEntry.

        Args:
            name (str): Catalog id.
            kind (str): "curve2d", "surface" or "curve3d".
            family (LeafFamily): The lamination.
            domain (Domain): Box the family is defined on.
            K (Domain): Default compact set for the smoothing checks.
            L (float): Declared log-Lipschitz constant of the common slope.
            field (Optional[SlopeField]): Slope field when one exists.
            planar (Optional[str]): Id of the planar family this surface family extends constantly in y.
        """
        self.name = name
        self.kind = kind
        self.family = family
        self.domain = domain
        self.K = K
        self.L = L
        self.field = field
        self.planar = planar

    def __str__(self):
        return f"CatalogEntry.{self.name}{{kind={self.kind}, L={self.L:g}}}"

    def to_dict(self):
        return {
            "name": self.name,
            "kind": self.kind,
            "domain": self.domain.to_dict(),
            "K": self.K.to_dict(),
            "L": self.L,
            "planar": self.planar,
            "provenance": self.family.provenance,
        }


def _zeros(*arrays):
    return np.zeros(np.broadcast(*arrays).shape)


def _planar_entries() -> list[CatalogEntry]:
    flat_domain = Domain([(-2.0, 2.0), (-1.0, 2.0)])
    flat = LeafFamily2D(
        "flat",
        flat_domain,
        (-1.0, 2.0),
        lambda a, x: a + _zeros(a, x),
        lambda a, x: _zeros(a, x),
        lambda x, y: y + _zeros(x, y),
    )

    affine_domain = Domain([(-1.0, 1.0), (-1.0, 2.0)])
    affine = LeafFamily2D(
        "affine",
        affine_domain,
        (-2.0, 3.0),
        lambda a, x: a + x,
        lambda a, x: 1.0 + _zeros(a, x),
        lambda x, y: y - x,
    )

    osgood_domain = Domain([(-2.0, 2.0), (0.0, 1.0)])
    osgood = LeafFamily2D(
        "canonical-osgood",
        osgood_domain,
        (0.0, 1.0),
        lambda a, x: np.power(a, np.exp(-x)),
        lambda a, x: x_log_inv_abs(np.power(a, np.exp(-x))),
        lambda x, y: np.power(y, np.exp(x)),
    )

    perturbed_domain = Domain([(-2.0, 2.0), (0.01, 0.19)])
    perturbed = LeafFamily2D(
        "perturbed-affine",
        perturbed_domain,
        (0.0, 0.25),
        lambda a, x: a + a**2 * np.sin(x),
        lambda a, x: a**2 * np.cos(x),
        lambda x, y: 2.0 * y / (1.0 + np.sqrt(1.0 + 4.0 * y * np.sin(x))),
    )

    return [
        CatalogEntry(
            "flat", CURVE2D, flat, flat_domain, Domain([(-1.0, 1.0), (0.0, 1.0)]), 1.45,
            field=SlopeField2D("flat", lambda x, y: _zeros(x, y)),
        ),
        CatalogEntry(
            "affine", CURVE2D, affine, affine_domain, Domain([(-0.8, 0.8), (-0.5, 1.5)]), 1.45,
            field=SlopeField2D("affine", lambda x, y: 1.0 + _zeros(x, y)),
        ),
        CatalogEntry(
            "canonical-osgood", CURVE2D, osgood, osgood_domain, Domain([(-1.0, 1.0), (0.05, 0.95)]), 1.5,
            field=SlopeField2D("canonical-osgood", lambda x, y: x_log_inv_abs(y) + _zeros(x, y)),
        ),
        CatalogEntry(
            "perturbed-affine", CURVE2D, perturbed, perturbed_domain, Domain([(-1.0, 1.0), (0.03, 0.17)]), 1.5,
            field=SlopeField2D(
                "perturbed-affine",
                lambda x, y: (perturbed.inverse(x, y) ** 2) * np.cos(x),
            ),
        ),
    ]


def _surface_entries() -> list[CatalogEntry]:
    domain = Domain([(-1.0, 1.0), (-1.0, 1.0), (0.05, 0.95)], labels=SURFACE_AXES)
    K = Domain([(-0.8, 0.8), (-0.8, 0.8), (0.1, 0.9)], labels=SURFACE_AXES)
    flat = SurfaceFamily3D(
        "flat-surface",
        domain,
        (-1.0, 2.0),
        lambda a, x, y: a + _zeros(a, x, y),
        lambda a, x, y: _zeros(a, x, y),
        lambda a, x, y: _zeros(a, x, y),
        lambda x, y, z: z + _zeros(x, y, z),
    )
    tilted = SurfaceFamily3D(
        "tilted-surface",
        domain,
        (-3.0, 4.0),
        lambda a, x, y: a + x + y,
        lambda a, x, y: 1.0 + _zeros(a, x, y),
        lambda a, x, y: 1.0 + _zeros(a, x, y),
        lambda x, y, z: z - x - y,
    )
    canonical = SurfaceFamily3D(
        "canonical-surface",
        domain,
        (0.0, 1.0),
        lambda a, x, y: np.power(a, np.exp(-x)) + _zeros(a, x, y),
        lambda a, x, y: x_log_inv_abs(np.power(a, np.exp(-x))) + _zeros(a, x, y),
        lambda a, x, y: _zeros(a, x, y),
        lambda x, y, z: np.power(z, np.exp(x)) + _zeros(x, y, z),
    )
    return [
        CatalogEntry("flat-surface", SURFACE, flat, domain, K, 1.45, planar="flat"),
        CatalogEntry("tilted-surface", SURFACE, tilted, domain, K, 1.45),
        CatalogEntry("canonical-surface", SURFACE, canonical, domain, K, 1.5, planar="canonical-osgood"),
    ]


def _curve_entries() -> list[CatalogEntry]:
    box = Domain([(-1.0, 1.0), (0.05, 0.95), (0.05, 0.95)])

    def stack(first, second):
        first, second = np.broadcast_arrays(first, second)
        return np.stack([first, second], axis=-1)

    flat = CurveFamily3D(
        "flat-3d",
        box,
        ((0.05, 0.95), (0.05, 0.95)),
        lambda a1, a2, x: stack(a1 + _zeros(a1, x), a2 + _zeros(a2, x)),
        lambda a1, a2, x: stack(_zeros(a1, x), _zeros(a2, x)),
        lambda x, y1, y2: stack(y1 + _zeros(x, y1), y2 + _zeros(x, y2)),
    )
    drift = CurveFamily3D(
        "drift-3d",
        box,
        ((-0.95, 1.95), (0.05, 0.95)),
        lambda a1, a2, x: stack(a1 + x, a2 + _zeros(a2, x)),
        lambda a1, a2, x: stack(1.0 + _zeros(a1, x), _zeros(a2, x)),
        lambda x, y1, y2: stack(y1 - x, y2 + _zeros(x, y2)),
    )
    canonical = CurveFamily3D(
        "canonical-osgood-3d",
        box,
        ((0.0, 1.0), (0.0, 1.0)),
        lambda a1, a2, x: stack(np.power(a1, np.exp(-x)), a2 + _zeros(a2, x)),
        lambda a1, a2, x: stack(x_log_inv_abs(np.power(a1, np.exp(-x))), _zeros(a2, x)),
        lambda x, y1, y2: stack(np.power(y1, np.exp(x)), y2 + _zeros(x, y2)),
    )
    K = box.interior(0.1)
    return [
        CatalogEntry(
            "flat-3d", CURVE3D, flat, box, K, 1.45,
            field=SlopeField3D("flat-3d", lambda x, y1, y2: stack(_zeros(x, y1), _zeros(x, y2))),
        ),
        CatalogEntry(
            "drift-3d", CURVE3D, drift, box, K, 1.45,
            field=SlopeField3D("drift-3d", lambda x, y1, y2: stack(1.0 + _zeros(x, y1), _zeros(x, y2))),
        ),
        CatalogEntry(
            "canonical-osgood-3d", CURVE3D, canonical, box, K, 1.5,
            field=SlopeField3D(
                "canonical-osgood-3d",
                lambda x, y1, y2: stack(x_log_inv_abs(y1) + _zeros(x, y1), _zeros(x, y2)),
            ),
        ),
    ]


class FamilyManager:
    """
    A store of CatalogEntry instances, indexed by catalog id. Ids of the form
    "slope-field:<path>" are loaded from the file on first use and cached.
    """

    def __init__(self, integrator: Optional[Rk4Integrator] = None, seed: int = 0):
        """
        Creates a FamilyManager holding the built-in catalog.

        Args:
            integrator (Optional[Rk4Integrator]): Integrator for families built from sampled fields.
            seed (int): Seeds the L estimate of sampled fields.
        """
        self.integrator = integrator or Rk4Integrator()
        self.seed = seed
        self.entries: dict[str, CatalogEntry] = {}
        self.lock = threading.Lock()
        self.add_entries(*_planar_entries(), *_surface_entries(), *_curve_entries())

    def add_entries(self, *entries: CatalogEntry) -> None:
        for entry in entries:
            self.entries[entry.name] = entry

    def names(self) -> list[str]:
        return list(self.entries)

    def is_known(self, name: str) -> bool:
        return name in self.entries or name.startswith(SLOPE_FIELD_PREFIX)

    def get_by_name(self, name: str) -> CatalogEntry:
        """
        Retrieve an entry by id. Raises a ConfigError if the id is unknown.

        Args:
            name (str): Catalog id or "slope-field:<path>".
        """
        entry = self.entries.get(name)
        if entry is not None:
            return entry
        if not name.startswith(SLOPE_FIELD_PREFIX):
            raise ConfigError(f"unknown family {name}; known: {', '.join(self.names())}", field="family.id")
        with self.lock:
            entry = self.entries.get(name)
            if entry is None:
                entry = self._load_sampled(name)
                self.entries[name] = entry
        return entry

    def _load_sampled(self, name: str) -> CatalogEntry:
        path = name[len(SLOPE_FIELD_PREFIX):]
        try:
            field = load_sampled_field(path)
        except OSError as e:
            raise ConfigError(f"cannot read sampled field: {e}", field="family.id") from e
        domain = field.extent
        family = family_from_slope_field(field, domain, self.integrator)
        rng = np.random.default_rng(self.seed)
        estimate = estimate_log_lipschitz_L(field, domain, rng)
        probe_continuity(field, domain, rng)
        kind = CURVE2D if field.dimension == 2 else CURVE3D
        entry = CatalogEntry(
            name, kind, family, domain, domain.interior(0.1), estimate.L_effective, field=field
        )
        logger.info(f"Loaded {entry} from {path}")
        return entry
