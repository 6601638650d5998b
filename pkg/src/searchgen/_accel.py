"""Numba detection.

Set ``SEARCHGEN_DISABLE_NUMBA=1`` to force the pure-numpy kernels even when
numba is importable.
"""

from __future__ import annotations

import os

_FALSY = {"", "0", "false", "no", "off"}

NUMBA_DISABLED = os.environ.get("SEARCHGEN_DISABLE_NUMBA", "").strip().lower() not in _FALSY

try:
    import numba

    NUMBA_INSTALLED = True
except ImportError:  # pragma: no cover - numba ships with the dev environment
    numba = None
    NUMBA_INSTALLED = False

USE_NUMBA = NUMBA_INSTALLED and not NUMBA_DISABLED


def njit(*args, **kws):
    """``numba.njit(cache=True, nogil=True)`` or the identity when numba is absent."""
    if not NUMBA_INSTALLED:
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn
    kws.setdefault("cache", True)
    kws.setdefault("nogil", True)
    return numba.njit(*args, **kws)
