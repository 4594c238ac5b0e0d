"""Backend selection for the numeric kernels.

Set ``PSHGAUSS_BACKEND=numpy`` to force the pure-numpy code paths, or
``PSHGAUSS_BACKEND=numba`` (the default when numba imports) to JIT the hot
loops.  The flag is read once, at import time.
"""
from __future__ import annotations

import os

_requested = os.environ.get("PSHGAUSS_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"PSHGAUSS_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    _numba = None

HAVE_NUMBA = _numba is not None
BACKEND = "numba" if (_requested == "numba" and HAVE_NUMBA) else "numpy"


def njit(func=None, **kwargs):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise.

    Kernels are always compiled when numba exists (so both paths stay
    testable in one process); ``BACKEND`` decides which one is dispatched.
    """
    kwargs.setdefault("cache", True)

    def wrap(f):
        if not HAVE_NUMBA:
            return f
        return _numba.njit(**kwargs)(f)

    if func is None:
        return wrap
    return wrap(func)
