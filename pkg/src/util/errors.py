from typing import Optional


class LaminationError(Exception):
    """Base class for every error raised by the lamination toolkit."""


class DomainError(LaminationError, ValueError):
    """A parameter, base point or finite-difference stencil left its domain."""


class CoverageError(LaminationError, ValueError):
    """A point is not covered by the leaves available to the computation."""


class MonotonicityError(LaminationError, ValueError):
    """Two leaves that should be ordered are not strictly ordered."""


class SamplingInputError(LaminationError, ValueError):
    """A sampling routine was left without any usable sample."""


class ConfigError(LaminationError, ValueError):
    def __init__(self, message: str, field: str, line: Optional[int] = None):
        """
        Args:
            message (str): Human readable description.
            field (str): Dotted path of the offending config key.
            line (Optional[int]): Line number in the config file, when known.
        """
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{field}{where}: {message}")
        self.field = field
        self.line = line


class NumericError(LaminationError, RuntimeError):
    """An iterative method did not converge."""


class IntegrationError(NumericError):
    def __init__(self, message: str, last_x: float):
        super().__init__(f"{message} (last valid x={last_x:.6g})")
        self.last_x = last_x


class ConstructionError(LaminationError, RuntimeError):
    def __init__(self, message: str, worst=None):
        super().__init__(message)
        self.worst = worst


class LeafTruncated(LaminationError):
    def __init__(self, message: str, exit_x: float):
        super().__init__(f"{message} (exit at x={exit_x:.6g})")
        self.exit_x = exit_x
