"""Extended-real helpers.

+inf is represented by ``math.inf``.  The only non-IEEE rule we need is
``0 * inf = 0``: zero-mass atoms sitting on forbidden arcs contribute
nothing to a modular sum.
"""

from __future__ import annotations

import math

import numpy as np

INF = math.inf


def weighted_sum(weights, values) -> float:
    """Sum of ``w * v`` over entries with ``w > 0``; +inf if any such ``v`` is +inf."""
    w = np.asarray(weights, dtype=float)
    v = np.asarray(values, dtype=float)
    mask = w > 0
    if not mask.any():
        return 0.0
    v = v[mask]
    if np.isinf(v).any():
        return INF
    return float(np.dot(w[mask], v))


def parse_ext(value) -> float:
    """Parse a JSON extended real: a number or the string ``"inf"``."""
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "+inf", "infinity"):
            return INF
        raise ValueError(f"not an extended real: {value!r}")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"not an extended real: {value!r}")
    return float(value)


def format_ext(value: float):
    """Inverse of :func:`parse_ext`."""
    value = float(value)
    if math.isinf(value):
        if value < 0:
            raise ValueError("negative infinity is not an extended distance value")
        return "inf"
    return value
