"""字典相关工具函数"""

import copy
import json
from typing import Any, Dict, Mapping, Tuple


def deep_merge(dct: Mapping[str, Any], merge_dct: Mapping[str, Any]) -> Dict[str, Any]:
    """
    Recursively merge two dictionaries, returning a new dict.
    The original dicts are not modified.

    Args:
        dct (dict): The destination dictionary to merge into.
        merge_dct (dict): The source dictionary to merge from.

    Returns:
        dict: The merged dictionary.

    Example:
        >>> a = {"quadrature": {"t_level": 3}, "engine": {"jobs": 1}}
        >>> b = {"quadrature": {"seed": 7}}
        >>> deep_merge(a, b)
        {'quadrature': {'t_level': 3, 'seed': 7}, 'engine': {'jobs': 1}}
    """
    result = copy.deepcopy(dict(dct))
    for k, v in merge_dct.items():
        if k in result and isinstance(result[k], dict) and isinstance(v, Mapping):
            result[k] = deep_merge(result[k], v)
        else:
            result[k] = copy.deepcopy(v)
    return result


def drop_none(dct: Mapping[str, Any]) -> Dict[str, Any]:
    """Recursively remove keys whose value is None (CLI flags that were not given)."""
    result: Dict[str, Any] = {}
    for k, v in dct.items():
        if v is None:
            continue
        result[k] = drop_none(v) if isinstance(v, Mapping) else v
    return result


def encode_index(alpha: Tuple[int, ...]) -> str:
    """Multi-index -> JSON object key, e.g. (0, 2) -> "[0,2]"."""
    return json.dumps(list(alpha), separators=(",", ":"))


def decode_index(key: str) -> Tuple[int, ...]:
    """JSON object key -> multi-index, accepts "[0, 2]" as well as "[0,2]"."""
    value = json.loads(key)
    if not isinstance(value, list) or not all(isinstance(v, int) and v >= 0 for v in value):
        raise ValueError(f"invalid multi-index key: {key!r}")
    return tuple(value)
