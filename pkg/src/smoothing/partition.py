import numpy as np

from report.bound_report import BoundReport, SAMPLED_SUP_NOTE
from util.types import ArrayLike, FloatArray


class PartitionLambda:
    """
    Lambda_j(a) = cos^2(pi J / 2 (a - j/J)) on [(j-1)/J, (j+1)/J], zero elsewhere.

    At most two members are nonzero at any a and they sum to 1.
    """

    def __init__(self, J: int):
        if J < 1:
            raise ValueError(f"PartitionLambda: J must be positive, got {J}")
        self.J = int(J)

    def __str__(self):
        return f"PartitionLambda{{J={self.J}}}"

    def __call__(self, j: ArrayLike, a: ArrayLike) -> FloatArray:
        offset = np.asarray(a, dtype=float) * self.J - np.asarray(j, dtype=float)
        inside = np.abs(offset) <= 1.0
        return np.where(inside, np.cos(0.5 * np.pi * offset) ** 2, 0.0)

    def active(self, a: ArrayLike) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray]:
        """
        The two possibly nonzero members at each a.

        Returns:
            j0, j1, w0, w1: Indices j0 = floor(aJ), j1 = j0 + 1 and their weights.
        """
        scaled = np.asarray(a, dtype=float) * self.J
        j0 = np.floor(scaled)
        theta = 0.5 * np.pi * (scaled - j0)
        return j0, j0 + 1.0, np.cos(theta) ** 2, np.sin(theta) ** 2

    def total(self, a: ArrayLike) -> FloatArray:
        """Sum over every j whose support can reach a, evaluated from the definition."""
        j0 = np.floor(np.asarray(a, dtype=float) * self.J)
        return sum(self(j0 + shift, a) for shift in (-1.0, 0.0, 1.0, 2.0))


def check_partition_of_unity(
    js: list[int],
    rng: np.random.Generator,
    samples: int = 10_000,
    tol: float = 1e-12,
) -> BoundReport:
    """max |sum_j Lambda_j(a) - 1| over uniform a in [0, 1] for each J in `js`."""
    a = rng.uniform(0.0, 1.0, samples)
    worst = max(float(np.max(np.abs(PartitionLambda(J).total(a) - 1.0))) for J in js)
    return BoundReport(
        "partition-of-unity",
        worst,
        tol,
        suite="smooth2d",
        params={"J": js[-1]},
        grid=f"{samples} uniform a, J in {js}",
        notes=[SAMPLED_SUP_NOTE],
    )
