"""Numba switch.

Set ``SATSYNTH_NO_NUMBA=1`` to force the pure-numpy kernels even when numba
is importable.  The choice is made once, at import time.
"""

from __future__ import annotations

import logging
import os

logger = logging.getLogger(__name__)

_DISABLED = os.environ.get("SATSYNTH_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    if _DISABLED:
        raise ImportError("disabled by SATSYNTH_NO_NUMBA")
    import numba

    njit = numba.njit
    NUMBA_OK = True
except ImportError as exc:
    logger.debug("numba unavailable (%s); using numpy kernels", exc)
    NUMBA_OK = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return wrap


__all__ = ["njit", "NUMBA_OK"]
