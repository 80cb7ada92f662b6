"""Backend selection for the coefficient kernels.

The compiled extension (_fast, Cython) is preferred when it imported
cleanly; the numpy reference implementation is always available.  Set the
environment variable PARMAN_KERNELS to "c" or "python" before import to
force a choice, or call set_backend() at runtime (the benchmark script does
this to time one against the other).
"""

import os
import warnings

from . import reference

_BACKENDS = {"python": reference}

try:
    from . import _fast

    _BACKENDS["c"] = _fast
except ImportError:
    _fast = None


def _default_backend():
    requested = os.environ.get("PARMAN_KERNELS", "").strip().lower()
    if requested:
        if requested in _BACKENDS:
            return requested
        warnings.warn(
            f"PARMAN_KERNELS={requested!r} not available "
            f"(choices: {sorted(_BACKENDS)}); using fallback",
            RuntimeWarning,
            stacklevel=2,
        )
    return "c" if "c" in _BACKENDS else "python"


_active = _default_backend()


def backend_name():
    """Name of the active backend: "c" or "python"."""
    return _active


def available_backends():
    return sorted(_BACKENDS)


def set_backend(name):
    """Switch kernel backend at runtime; raises ValueError if not built."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; have {sorted(_BACKENDS)}")
    _active = name


def cauchy_product(a, b):
    return _BACKENDS[_active].cauchy_product(a, b)


def sin_cos_coeffs(a, s0, c0):
    return _BACKENDS[_active].sin_cos_coeffs(a, s0, c0)


def sin_cos_step(a_ext, S, C):
    return _BACKENDS[_active].sin_cos_step(a_ext, S, C)


def reciprocal_coeffs(a):
    return _BACKENDS[_active].reciprocal_coeffs(a)
