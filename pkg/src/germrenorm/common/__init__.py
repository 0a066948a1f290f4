"""
Common utilities shared across germrenorm.

This package contains dict helpers for configuration merging and the multi-index
bookkeeping used by jets and batched Taylor arithmetic.
"""

from .dicts import decode_index, deep_merge, drop_none, encode_index
from .multiindex import (
    MultiIndex,
    box_indices,
    box_position,
    box_products,
    index_factorial,
    total_degree_indices,
)

__all__ = [
    "deep_merge",
    "drop_none",
    "encode_index",
    "decode_index",
    "MultiIndex",
    "total_degree_indices",
    "box_indices",
    "box_position",
    "box_products",
    "index_factorial",
]
