from __future__ import annotations

from typing import Protocol, Sequence, Tuple, runtime_checkable

import numpy as np


@runtime_checkable
class GeometryBackend(Protocol):
    """
    Protocol for the geometry a Feynman amplitude is built on.

    A backend supplies the squared distance 𝐝², the metric tensor, the heat coefficients of the
    local heat-kernel expansion, the cut-off ψ and the heat kernel itself. The shipped flat
    backend satisfies it exactly; curved backends must also supply smooth pullbacks of the
    distance remainder, which the sector engine does not approximate.

    Methods:
        dist2(x, y): squared geodesic distance.
        metric_at(x): the metric tensor g_{μν}(x).
        heat_coefficient(k, x, y): a_k(x, y), with a_0 ≡ 1.
        cutoff(r2): the cut-off ψ as a function of 𝐝².
        heat_kernel(t, x, y): K_t(x, y).
    """

    dim: int

    @property
    def has_zero_mode(self) -> bool: ...
    def dist2(self, x: np.ndarray, y: np.ndarray) -> np.ndarray: ...
    def metric_at(self, x: np.ndarray) -> np.ndarray: ...
    def heat_coefficient(self, k: int, x: np.ndarray, y: np.ndarray) -> np.ndarray: ...
    def cutoff(self, r2: np.ndarray) -> np.ndarray: ...
    def heat_kernel(self, t: float, x: np.ndarray, y: np.ndarray) -> np.ndarray: ...


@runtime_checkable
class SmoothFactor(Protocol):
    """
    Protocol for a smooth function on the cube [0, 1]^E whose t-jets can be evaluated in batch.

    The continuation engine integrates t^{c(s)-1} times such a factor. `taylor_grid` returns,
    for each point, the normalized Taylor coefficients ∂^β f / β! for all β in the box
    0 ≤ β_i ≤ caps_i, columns in `common.multiindex.box_indices` order.
    """

    @property
    def dim(self) -> int: ...
    def taylor_grid(self, points: np.ndarray, caps: Sequence[int]) -> np.ndarray: ...
    def fingerprint(self) -> bytes: ...


FactorKey = Tuple[bytes, Tuple[int, ...]]
