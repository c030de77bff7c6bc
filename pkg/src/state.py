from __future__ import annotations
import threading
import time
import zlib
from typing import TYPE_CHECKING, Any, Callable

import numpy as np

if TYPE_CHECKING:
    from manager.experiment_config import ExperimentConfig
    from manager.family_manager import FamilyManager


class AppState:
    def __init__(self, config: ExperimentConfig, family_manager: FamilyManager):
        self.config = config
        self.family_manager = family_manager
        self.started = time.perf_counter()
        # Shared constructions (smoothed fields, projections) keyed by name
        self.cache: dict[str, Any] = {}
        self.locks: dict[str, threading.Lock] = {}
        self.lock = threading.Lock()

    def elapsed(self) -> float:
        return time.perf_counter() - self.started

    def rng_for(self, index: int) -> np.random.Generator:
        """Generator of the index-th sweep cell; independent of scheduling."""
        return np.random.default_rng([self.config.seed, index])

    def rng_for_key(self, key: str) -> np.random.Generator:
        return np.random.default_rng([self.config.seed, zlib.crc32(key.encode())])

    def cached(self, key: str, build: Callable[[], Any]) -> Any:
        """Builds the value for `key` once; concurrent callers wait for the first build."""
        with self.lock:
            key_lock = self.locks.setdefault(key, threading.Lock())
        with key_lock:
            if key not in self.cache:
                self.cache[key] = build()
            return self.cache[key]
