"""Numba switch.

Set ``PWSMANIFOLD_DISABLE_NUMBA=1`` before import to run every kernel as plain
Python/numpy. The flag is read once, at import time.
"""
from __future__ import annotations

import os

_DISABLED = os.environ.get("PWSMANIFOLD_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError("numba disabled by PWSMANIFOLD_DISABLE_NUMBA")
    import numba as _numba
    HAS_NUMBA = True
except ImportError:
    _numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA


def njit(*args, **kwargs):
    """``numba.njit`` when enabled, identity decorator otherwise."""
    if USE_NUMBA:
        return _numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(func):
        return func

    return wrap


def backend_name() -> str:
    return "numba" if USE_NUMBA else "python"
