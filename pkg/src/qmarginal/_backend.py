"""Kernel backend selection.

Hot loops (the permutation sweep and dense term filling) have two
implementations: numba @njit kernels and a pure-Python/numpy fallback.
The fallback is used when numba is missing, or when the environment
variable ``QMARGINAL_DISABLE_NUMBA`` is set to anything other than
``0``/empty.  ``active_backend()`` is consulted at call time, so tests
can flip ``FORCE_FALLBACK`` on an imported module.
"""

import os
import warnings

DISABLE_ENV = "QMARGINAL_DISABLE_NUMBA"


class PerformanceWarning(UserWarning):
    """Issued when the accelerated kernel path is unavailable."""


try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        # decorator that returns the function unchanged
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


FORCE_FALLBACK = os.environ.get(DISABLE_ENV, "0") not in ("", "0", "false", "False")

if not HAVE_NUMBA and not FORCE_FALLBACK:  # pragma: no cover
    warnings.warn(
        "numba is not installed; qmarginal falls back to pure-Python kernels "
        "(correct but much slower)",
        PerformanceWarning,
    )


def active_backend() -> str:
    """Return 'numba' or 'python' depending on availability and the env flag."""
    if HAVE_NUMBA and not FORCE_FALLBACK:
        return "numba"
    return "python"
