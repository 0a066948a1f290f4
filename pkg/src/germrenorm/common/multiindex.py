"""Multi-index enumeration shared by jets and batched Taylor arrays."""

from functools import lru_cache
from itertools import product
from math import factorial
from typing import Dict, List, Tuple

MultiIndex = Tuple[int, ...]


@lru_cache(maxsize=None)
def total_degree_indices(dim: int, order: int) -> Tuple[MultiIndex, ...]:
    """All α ∈ ℕ^dim with |α| ≤ order, graded by degree then lexicographically reversed."""
    if order < 0:
        return ()
    if dim == 0:
        return ((),)
    out: List[MultiIndex] = []
    for degree in range(order + 1):
        out.extend(_exact_degree(dim, degree))
    return tuple(out)


def _exact_degree(dim: int, degree: int) -> List[MultiIndex]:
    if dim == 1:
        return [(degree,)]
    out: List[MultiIndex] = []
    for head in range(degree, -1, -1):
        for tail in _exact_degree(dim - 1, degree - head):
            out.append((head,) + tail)
    return out


@lru_cache(maxsize=None)
def box_indices(caps: Tuple[int, ...]) -> Tuple[MultiIndex, ...]:
    """All β with 0 ≤ β_i ≤ caps_i, in C order."""
    return tuple(product(*(range(c + 1) for c in caps)))


@lru_cache(maxsize=None)
def box_position(caps: Tuple[int, ...]) -> Dict[MultiIndex, int]:
    return {beta: i for i, beta in enumerate(box_indices(caps))}


@lru_cache(maxsize=None)
def box_products(caps: Tuple[int, ...]) -> Tuple[Tuple[int, int, int], ...]:
    """Triples (i, j, k) with index_i + index_j = index_k inside the box."""
    indices = box_indices(caps)
    pos = box_position(caps)
    triples = []
    for i, a in enumerate(indices):
        for j, b in enumerate(indices):
            c = tuple(x + y for x, y in zip(a, b))
            k = pos.get(c)
            if k is not None:
                triples.append((i, j, k))
    return tuple(triples)


def index_factorial(alpha: MultiIndex) -> int:
    out = 1
    for a in alpha:
        out *= factorial(a)
    return out

