"""Kernel backend selection: numba-jitted loops or plain NumPy.

The hot loops (union-find labeling, biconnectivity scan, path enumeration)
are written once as ordinary Python functions over NumPy arrays.  Under the
"numba" backend they are compiled with @njit on first use; under the "numpy"
backend the same functions run interpreted, and operations that have a truly
vectorized alternative (cluster labeling) dispatch to it instead.

Selection order:
  1. set_backend("numba" | "numpy") runtime override, if called;
  2. PERC3D_DISABLE_NUMBA environment variable (any value but "" or "0");
  3. "numba" when importable, else "numpy".
"""

import os

try:
    import numba as _numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None
    HAVE_NUMBA = False

_forced = None


def _env_disabled() -> bool:
    return os.environ.get("PERC3D_DISABLE_NUMBA", "") not in ("", "0")


def set_backend(name):
    """Force the backend to "numba" or "numpy"; None restores auto-detect."""
    global _forced
    if name not in (None, "numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ValueError("numba backend requested but numba is not importable")
    _forced = name


def active_backend() -> str:
    if _forced is not None:
        return _forced
    if not HAVE_NUMBA or _env_disabled():
        return "numpy"
    return "numba"


class hot_kernel:
    """Decorator wrapping a loop kernel with lazy one-time jit compilation.

    Kernels must be self-contained (no calls to other wrapped kernels), take
    only scalars and NumPy arrays, and behave identically interpreted and
    compiled.  The interpreted path is the numpy-backend fallback.
    """

    def __init__(self, pyfunc):
        self.pyfunc = pyfunc
        self._jitted = None
        self.__name__ = pyfunc.__name__
        self.__doc__ = pyfunc.__doc__

    def __call__(self, *args):
        if active_backend() == "numba":
            if self._jitted is None:
                self._jitted = _numba.njit(cache=True)(self.pyfunc)
            return self._jitted(*args)
        return self.pyfunc(*args)
