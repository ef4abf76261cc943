"""Hot loops: MLP forward/backward, online SGD, rolling median.

Two interchangeable backends expose the same functions. The numba backend is
used when numba imports cleanly, unless ``AGING_FORECAST_DISABLE_NUMBA`` is
set to a truthy value, in which case the pure-numpy backend is selected.

Flat MLP parameter layout (length ``h*d + 2*h + 1``)::

    [ W[0,0..d-1], ..., W[h-1,0..d-1] | b[0..h-1] | v[0..h-1] | c ]

with ``W`` the hidden weights (row per hidden unit), ``b`` hidden biases,
``v`` output weights and ``c`` the output bias.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _numpy_kernels

ENV_FLAG = "AGING_FORECAST_DISABLE_NUMBA"


def _flag_set() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() not in ("", "0", "false", "no")


def _load_numba() -> ModuleType | None:
    try:
        from . import _numba_kernels
    except ImportError:
        return None
    return _numba_kernels


numba_backend = None if _flag_set() else _load_numba()
numpy_backend = _numpy_kernels

backend: ModuleType = numba_backend if numba_backend is not None else numpy_backend
BACKEND_NAME = "numba" if backend is numba_backend else "numpy"


def get_backend(name: str | None = None) -> ModuleType:
    """Return the kernel module for ``name`` ("numba"/"numpy"), default active."""
    if name is None:
        return backend
    if name == "numpy":
        return numpy_backend
    if name == "numba":
        mod = numba_backend or _load_numba()
        if mod is None:
            raise RuntimeError("numba backend requested but numba is not importable")
        return mod
    raise ValueError(f"unknown kernel backend {name!r}")


def n_params(d: int, h: int) -> int:
    return h * d + 2 * h + 1
