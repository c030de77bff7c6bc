import numpy as np

from util.types import ArrayLike, FloatArray

CHI_VARIANTS = ("cubic", "bump")


def _smoothstep(u: FloatArray) -> FloatArray:
    return u * u * (3.0 - 2.0 * u)


def _smoothstep_derivative(u: FloatArray) -> FloatArray:
    return 6.0 * u * (1.0 - u)


def _exp_ramp(u: FloatArray) -> FloatArray:
    safe = np.where(u > 0, u, 1.0)
    return np.where(u > 0, np.exp(-1.0 / safe), 0.0)


def _exp_transition(u: FloatArray) -> FloatArray:
    up, down = _exp_ramp(u), _exp_ramp(1.0 - u)
    return up / (up + down)


def _exp_transition_derivative(u: FloatArray) -> FloatArray:
    up, down = _exp_ramp(u), _exp_ramp(1.0 - u)
    safe_u = np.where(u > 0, u, 1.0)
    safe_v = np.where(u < 1, 1.0 - u, 1.0)
    d_up = np.where(u > 0, up / safe_u**2, 0.0)
    d_down = np.where(u < 1, down / safe_v**2, 0.0)
    return (d_up * down + up * d_down) / (up + down) ** 2


class CutoffChi:
    """
    C^1 cutoff with chi = 1 on [0, 1/4] and chi = 0 on [3/4, 1].

    On [1/4, 3/4], chi(t) = s(2 (3/4 - t)) where s is the cubic smoothstep
    3u^2 - 2u^3 ("cubic", |chi'| <= 3) or the C^infinity transition
    e^{-1/u} / (e^{-1/u} + e^{-1/(1-u)}) ("bump"). Both are symmetric, so chi(1/2) = 1/2.
    """

    def __init__(self, variant: str = "cubic"):
        if variant not in CHI_VARIANTS:
            raise ValueError(f"CutoffChi: unknown variant {variant}, expected one of {CHI_VARIANTS}")
        self.variant = variant
        if variant == "cubic":
            self.bound = 3.0
        else:
            t = np.linspace(0.0, 1.0, 20001)
            self.bound = float(np.max(np.abs(self.derivative(t))))

    def __str__(self):
        return f"CutoffChi.{self.variant}{{C_chi={self.bound:g}}}"

    @staticmethod
    def _inner(t: ArrayLike) -> FloatArray:
        return np.clip(2.0 * (0.75 - np.asarray(t, dtype=float)), 0.0, 1.0)

    def __call__(self, t: ArrayLike) -> FloatArray:
        u = self._inner(t)
        if self.variant == "cubic":
            return _smoothstep(u)
        return _exp_transition(u)

    def derivative(self, t: ArrayLike) -> FloatArray:
        t = np.asarray(t, dtype=float)
        u = self._inner(t)
        ramp = (t > 0.25) & (t < 0.75)
        if self.variant == "cubic":
            du = _smoothstep_derivative(u)
        else:
            du = _exp_transition_derivative(u)
        return np.where(ramp, -2.0 * du, 0.0)

    def to_dict(self):
        return {"variant": self.variant, "C_chi": self.bound}
