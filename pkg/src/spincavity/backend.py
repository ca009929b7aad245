"""Kernel backend selection.

The stencil sweeps and reductions that dominate a run ship in two
functionally identical implementations: numba ``@njit`` kernels and pure
numpy array code.  The environment variable ``SPINCAVITY_BACKEND`` picks
one at import time:

    SPINCAVITY_BACKEND=numba   force numba (ImportError if unavailable)
    SPINCAVITY_BACKEND=numpy   force the pure-numpy fallback
    unset / auto               numba when importable, numpy otherwise

Kernels are serial (no prange): summation order is fixed, so repeated
runs are byte-identical regardless of thread-count environment.
"""

from __future__ import annotations

import os

_requested = os.environ.get("SPINCAVITY_BACKEND", "auto").strip().lower()
if _requested not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        f"SPINCAVITY_BACKEND must be 'numba', 'numpy' or unset, got {_requested!r}"
    )

if _requested == "numpy":
    HAVE_NUMBA = False
else:
    try:
        from numba import njit  # noqa: F401

        HAVE_NUMBA = True
    except ImportError:
        if _requested == "numba":
            raise
        HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _requested in ("auto", "numba")
BACKEND = "numba" if USE_NUMBA else "numpy"


def jit(func):
    """Compile ``func`` with numba when the numba backend is active.

    Used on the numba kernel variants only; the numpy variants are plain
    functions.  cache=True persists compiled code next to the package so
    repeated processes skip recompilation.
    """
    if not HAVE_NUMBA:
        return func
    from numba import njit

    return njit(cache=True, fastmath=False)(func)
