"""Kernel backend selection.

The hot numeric kernels (ray casting, box/triangle overlap, farthest point
sampling, ball query, interpolation) exist twice: a numba ``@njit`` version
and a pure-numpy version with identical semantics.  The active backend is
chosen once at import time from the ``POINTGRASP_BACKEND`` environment
variable:

    POINTGRASP_BACKEND=numba   force numba (ImportError if unavailable)
    POINTGRASP_BACKEND=numpy   force the pure-numpy fallback
    unset                      numba when importable, else numpy
"""

import os

_ENV_VAR = "POINTGRASP_BACKEND"
_VALID = ("numba", "numpy")


def _detect():
    requested = os.environ.get(_ENV_VAR, "").strip().lower()
    if requested and requested not in _VALID:
        raise RuntimeError(
            f"{_ENV_VAR}={requested!r} is not one of {_VALID}"
        )
    if requested == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
        return "numba"
    except ImportError:
        if requested == "numba":
            raise
        return "numpy"


ACTIVE = _detect()


def active_backend():
    """Name of the kernel backend selected at import time."""
    return ACTIVE
