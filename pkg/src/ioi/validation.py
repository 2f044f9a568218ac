"""Small argument-checking helpers used across the engines.

These raise :class:`~ioi.exceptions.InputError` with the offending name in the
message, so CLI users see which config field was bad.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .exceptions import InputError

__all__ = [
    "require_finite",
    "require_positive",
    "require_nonnegative",
    "require_int_at_least",
    "require_open_unit",
    "require_unit_interval",
    "require_choice",
    "as_float_vector",
]


def require_finite(value: object, name: str) -> float:
    """Coerce to float and insist the result is finite."""
    try:
        out = float(value)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        raise InputError(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(out):
        raise InputError(f"{name} must be finite, got {out!r}")
    return out


def require_positive(value: object, name: str) -> float:
    out = require_finite(value, name)
    if out <= 0.0:
        raise InputError(f"{name} must be > 0, got {out!r}")
    return out


def require_nonnegative(value: object, name: str) -> float:
    out = require_finite(value, name)
    if out < 0.0:
        raise InputError(f"{name} must be >= 0, got {out!r}")
    return out


def require_int_at_least(value: object, name: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise InputError(f"{name} must be an integer, got {value!r}")
    out = int(value)
    if out < minimum:
        raise InputError(f"{name} must be >= {minimum}, got {out}")
    return out


def require_open_unit(value: object, name: str) -> float:
    """A probability strictly inside (0, 1)."""
    out = require_finite(value, name)
    if not 0.0 < out < 1.0:
        raise InputError(f"{name} must lie strictly between 0 and 1, got {out!r}")
    return out


def require_unit_interval(value: object, name: str) -> float:
    out = require_finite(value, name)
    if not 0.0 <= out <= 1.0:
        raise InputError(f"{name} must lie in [0, 1], got {out!r}")
    return out


def require_choice(value: object, name: str, options: Iterable[str]) -> str:
    opts = tuple(options)
    if value not in opts:
        raise InputError(f"{name} must be one of {opts}, got {value!r}")
    return str(value)


def as_float_vector(values: Sequence[float] | np.ndarray, name: str) -> np.ndarray:
    """1-D float array, all entries finite."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise InputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise InputError(f"{name} must not be empty")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite entries")
    return arr
