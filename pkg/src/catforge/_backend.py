"""Backend selection for the hot kernels.

CATFORGE_BACKEND=auto|numba|numpy picks the implementation:

* auto (default): numba when importable, numpy otherwise
* numba: require numba, fail loudly if missing
* numpy: force the pure-numpy/interpreted path

The flag is read once at import. `jit_or_plain` wraps a kernel in
numba.njit(cache=True) on the numba path and returns it untouched on the
numpy path, for kernels whose single source runs correctly either way.
"""

import os

_CHOICE = os.environ.get("CATFORGE_BACKEND", "auto").strip().lower()
if _CHOICE not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        f"CATFORGE_BACKEND must be auto, numba or numpy, got {_CHOICE!r}"
    )

if _CHOICE == "numpy":
    USING_NUMBA = False
else:
    try:
        import numba  # noqa: F401

        USING_NUMBA = True
    except ImportError:
        if _CHOICE == "numba":
            raise RuntimeError(
                "CATFORGE_BACKEND=numba but numba is not importable"
            )
        USING_NUMBA = False

BACKEND_NAME = "numba" if USING_NUMBA else "numpy"


def jit_or_plain(func=None, **njit_kwargs):
    """Apply numba.njit on the numba backend, identity otherwise."""

    def wrap(f):
        if USING_NUMBA:
            from numba import njit

            njit_kwargs.setdefault("cache", True)
            return njit(**njit_kwargs)(f)
        return f

    if func is not None:
        return wrap(func)
    return wrap


def thread_count() -> int:
    """Worker count for sweep parallelism, capped by CATFORGE_THREADS."""
    raw = os.environ.get("CATFORGE_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, min(n if raw else (os.cpu_count() or 1), 32))
