import numpy as np
import numpy.typing as npt

type FloatArray = npt.NDArray[np.float64]

type ArrayLike = float | FloatArray

type Interval = tuple[float, float]
