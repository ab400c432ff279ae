"""Backend selection for the hot numeric kernels.

The environment variable TGOSPA_BACKEND picks the implementation:
"numba" (compiled, the default when numba imports), "numpy" (pure fallback),
or "auto".  Solver entry points also accept an explicit backend name, which
overrides the environment.
"""

from __future__ import annotations

import os

_CHOICES = ("auto", "numba", "numpy")


def _resolve(name: str):
    if name not in _CHOICES:
        raise ValueError(f"unknown backend {name!r}; choose from {_CHOICES}")
    if name in ("auto", "numba"):
        try:
            from . import _kernels_numba as mod

            return "numba", mod
        except ImportError:
            if name == "numba":
                raise
    from . import _kernels_numpy as mod

    return "numpy", mod


_ACTIVE_NAME, _ACTIVE = _resolve(os.environ.get("TGOSPA_BACKEND", "auto").lower())


def active_backend() -> str:
    """Name of the backend selected at import time."""
    return _ACTIVE_NAME


def get_kernels(name: str | None = None):
    """Kernel module for the given backend name (None = the active one)."""
    if name is None:
        return _ACTIVE
    return _resolve(name)[1]
