"""
Finite-difference helpers shared by every leafwise derivative measurement.
"""

from typing import Callable

import numpy as np

from util.types import FloatArray


def central_difference(
    g: Callable[[FloatArray], FloatArray], x0: FloatArray, h: float
) -> FloatArray:
    """
    Second-order central difference of g at x0.

    Args:
        g (Callable): Vectorized function of one real variable.
        x0 (FloatArray): Evaluation points.
        h (float): Step.
    Returns:
        derivative (FloatArray): (g(x0 + h) - g(x0 - h)) / 2h.
    """
    x0 = np.asarray(x0, dtype=float)
    return (g(x0 + h) - g(x0 - h)) / (2.0 * h)


def richardson_derivative(
    g: Callable[[FloatArray], FloatArray], x0: FloatArray, h: float
) -> FloatArray:
    """
    Central difference with one level of Richardson extrapolation.

    Exactly zero wherever g is exactly constant on the stencil [x0 - h, x0 + h].

    Args:
        g (Callable): Vectorized function of one real variable.
        x0 (FloatArray): Evaluation points.
        h (float): Outer step; the inner step is h / 2.
    Returns:
        derivative (FloatArray): (4 D(h/2) - D(h)) / 3.
    """
    coarse = central_difference(g, x0, h)
    fine = central_difference(g, x0, 0.5 * h)
    return (4.0 * fine - coarse) / 3.0


def fd_step(width: float, scale: float = 1e-5) -> float:
    """Default finite-difference step: a fixed fraction of the domain width."""
    return scale * width


def log_modulus(t: FloatArray) -> FloatArray:
    """The Osgood modulus t log(1/t), valid for 0 < t < 1."""
    t = np.asarray(t, dtype=float)
    return t * np.log(1.0 / t)


def x_log_inv_abs(y: FloatArray) -> FloatArray:
    """
    y log(1/|y|), extended by 0 at y = 0.

    The odd extension keeps the canonical Osgood slope defined on a whole box.
    """
    y = np.asarray(y, dtype=float)
    safe = np.where(y == 0.0, 1.0, np.abs(y))
    return np.where(y == 0.0, 0.0, -y * np.log(safe))
