from typing import Any, Optional

from util.errors import ConfigError


class CheckParser:
    """
    Represents the data for one check loaded from a config file, bound to one
    sweep cell (delta, J). Every other key is a check argument; the typed
    getters validate them and name the offending key as checks.<name>.<arg>.
    """

    def __init__(self, suite: str, **kwargs):
        self.suite: str = suite
        self.name: str = kwargs.pop("name").casefold()
        self.delta: Optional[float] = kwargs.pop("delta", None)
        self.grid_j: Optional[int] = kwargs.pop("J", None)
        self.args: dict = kwargs

    def __str__(self):
        where = f" at delta={self.delta:g}" if self.delta is not None else ""
        return f"Check.{self.name}{where}"

    def _error(self, arg_name: str, message: str) -> ConfigError:
        return ConfigError(f"{self}: {message}", field=f"checks.{self.name}.{arg_name}")

    def get_arg(self, arg_name: str, default: Any = None) -> Any | None:
        return self.args.get(arg_name, default)

    def get_float(
        self,
        arg_name: str,
        default: Optional[float] = None,
        lo: Optional[float] = None,
        hi: Optional[float] = None,
    ) -> Optional[float]:
        """The argument as a float, required to lie in the open interval (lo, hi) when given."""
        value = self.args.get(arg_name, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self._error(arg_name, f"expected a number, got {value!r}")
        value = float(value)
        if (lo is not None and value <= lo) or (hi is not None and value >= hi):
            raise self._error(arg_name, f"{value:g} outside ({lo}, {hi})")
        return value

    def get_int(self, arg_name: str, default: int) -> int:
        value = self.args.get(arg_name, default)
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise self._error(arg_name, f"expected a positive integer, got {value!r}")
        return value

    def get_int_list(self, arg_name: str, default: list[int]) -> list[int]:
        value = self.args.get(arg_name, default)
        values = value if isinstance(value, list) else [value]
        if not values or any(isinstance(v, bool) or not isinstance(v, int) or v < 1 for v in values):
            raise self._error(arg_name, f"expected positive integers, got {value!r}")
        return values
