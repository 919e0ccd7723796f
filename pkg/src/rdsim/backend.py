"""Kernel backend selection.

Set ``RDSIM_NO_NUMBA=1`` before import to run the pure-numpy kernels.
"""
import os

DISABLE_ENV = "RDSIM_NO_NUMBA"


def _numba_available():
    if os.environ.get(DISABLE_ENV, "").strip().lower() in ("1", "true", "yes", "on"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


USE_NUMBA = _numba_available()
NAME = "numba" if USE_NUMBA else "numpy"
