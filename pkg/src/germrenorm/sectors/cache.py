"""
Memoised χ-jet grids.

Grids are keyed by a SHA-256 over the factor fingerprint, the Taylor caps and the t-points. An
in-process `cachetools.LRUCache` serves repeated requests; with a cache directory the grids are
also stored as `.npz` files and survive the process.
"""

import hashlib
from logging import getLogger
from pathlib import Path
from threading import Lock
from typing import Optional, Sequence

import numpy as np
from cachetools import LRUCache

from germrenorm.core.contracts import SmoothFactor

logger = getLogger(__name__)


class ChiJetCache:
    """
    Two-level cache for `SmoothFactor.taylor_grid` results.

    Attributes:
        maxsize (int): number of grids kept in memory.
        directory (Optional[Path]): where grids are persisted, None for memory only.
    """

    def __init__(self, maxsize: int = 64, directory: Optional[Path] = None):
        self._memory: LRUCache = LRUCache(maxsize=maxsize)
        self._lock = Lock()
        self.directory = Path(directory) if directory else None
        self.hits = 0
        self.misses = 0
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def key(factor: SmoothFactor, points: np.ndarray, caps: Sequence[int]) -> str:
        digest = hashlib.sha256()
        digest.update(factor.fingerprint())
        digest.update(np.asarray(caps, dtype=np.int64).tobytes())
        digest.update(np.ascontiguousarray(points, dtype=float).tobytes())
        return digest.hexdigest()

    def _path(self, key: str) -> Optional[Path]:
        return self.directory / f"{key}.npz" if self.directory is not None else None

    def get(self, key: str) -> Optional[np.ndarray]:
        with self._lock:
            if key in self._memory:
                self.hits += 1
                return self._memory[key]
        path = self._path(key)
        if path is not None and path.exists():
            with np.load(path) as stored:
                grid = stored["coeffs"]
            with self._lock:
                self._memory[key] = grid
                self.hits += 1
            logger.debug(f"χ-jet grid {key[:12]} loaded from {path}")
            return grid
        with self._lock:
            self.misses += 1
        return None

    def put(self, key: str, grid: np.ndarray) -> None:
        with self._lock:
            self._memory[key] = grid
        path = self._path(key)
        if path is not None:
            np.savez_compressed(path, coeffs=grid)

    def taylor_grid(
        self, factor: SmoothFactor, points: np.ndarray, caps: Sequence[int]
    ) -> np.ndarray:
        key = self.key(factor, points, caps)
        grid = self.get(key)
        if grid is None:
            grid = factor.taylor_grid(points, caps)
            self.put(key, grid)
        return grid

    def clear(self) -> None:
        with self._lock:
            self._memory.clear()
            self.hits = 0
            self.misses = 0


__all__ = ["ChiJetCache"]
