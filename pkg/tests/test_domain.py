import numpy as np
import pytest

from lamination.domain import Domain
from util.errors import DomainError


def test_str_lists_every_interval():
    domain = Domain([(-1.0, 1.0), (0.05, 0.95)])
    assert str(domain) == "Domain{-1..1, 0.05..0.95}"
    assert domain.dimension == 2
    assert domain.width(1) == pytest.approx(0.9)


def test_empty_interval_is_rejected():
    with pytest.raises(DomainError):
        Domain([(0.0, 1.0), (1.0, 1.0)])


def test_dimension_must_be_two_or_three():
    with pytest.raises(DomainError):
        Domain([(0.0, 1.0)])


def test_interior_shrinks_each_face():
    inner = Domain([(0.0, 10.0), (-1.0, 1.0)]).interior(0.1)
    assert inner.interval(0) == pytest.approx((1.0, 9.0))
    assert inner.interval(1) == pytest.approx((-0.8, 0.8))


def test_polydisk():
    disk = Domain.polydisk(0.25, [0.5, 0.4])
    assert disk.radius == 0.25
    assert disk.center == (0.5, 0.4)
    assert disk.interval(0) == (-0.25, 0.25)
    assert disk.interval(2) == pytest.approx((0.15, 0.65))
    with pytest.raises(DomainError):
        Domain.polydisk(0.0, [0.5, 0.5])


def test_grid_is_flattened_tensor_grid():
    x, y = Domain([(0.0, 1.0), (0.0, 2.0)]).grid([3, 5])
    assert x.shape == (15,)
    assert set(np.round(x, 12)) == {0.0, 0.5, 1.0}
    assert y.max() == 2.0


def test_contains_with_tolerance():
    domain = Domain([(0.0, 1.0), (0.0, 1.0)])
    inside = domain.contains(np.array([0.5, 1.0 + 1e-9, 2.0]), np.array([0.5, 0.5, 0.5]), tol=1e-8)
    assert inside.tolist() == [True, True, False]
    with pytest.raises(DomainError):
        domain.require(np.array([2.0]), np.array([0.5]))


def test_from_dict_accepts_each_axis_naming():
    planar = Domain.from_dict({"x": [-1, 1], "y": [0, 1]})
    curves = Domain.from_dict({"x": [-1, 1], "y1": [0, 1], "y2": [0, 2]})
    surface = Domain.from_dict({"x": [-1, 1], "y": [-1, 1], "z": [0, 1]})
    assert planar.dimension == 2
    assert curves.interval(2) == (0.0, 2.0)
    assert surface.labels == ("x", "y", "z")
    assert Domain.from_dict(surface.to_dict()).bounds == surface.bounds


def test_polydisk_keeps_radius_and_center():
    disk = Domain.polydisk(0.2, (0.5, 0.4))
    data = disk.to_dict()
    assert data["radius"] == 0.2
    assert data["center"] == [0.5, 0.4]
    again = Domain.from_dict(data)
    assert again.radius == 0.2
    assert again.center == (0.5, 0.4)
    assert again.bounds == disk.bounds


def test_from_dict_rejects_unknown_axes():
    with pytest.raises(DomainError):
        Domain.from_dict({"x": [0, 1], "w": [0, 1]})
