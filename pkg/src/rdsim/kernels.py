"""Active kernel set, chosen once at import by :mod:`rdsim.backend`."""
from . import _kernels_numpy as numpy_impl
from .backend import NAME, USE_NUMBA

if USE_NUMBA:
    from . import _kernels_numba as numba_impl
    active = numba_impl
else:
    numba_impl = None
    active = numpy_impl

LEAPFROG = numpy_impl.LEAPFROG
YOSHIDA4 = numpy_impl.YOSHIDA4
RK4 = numpy_impl.RK4
INTEGRATORS = {"leapfrog": LEAPFROG, "yoshida4": YOSHIDA4, "rk4": RK4}

__all__ = ["NAME", "active", "numba_impl", "numpy_impl", "INTEGRATORS"]
