"""Kernel dispatch.

The compiled extension ``_ckernels`` is used when it was built; otherwise the
numpy fallback ``_pykernels`` is selected at import. Setting the environment
variable ``CYLAB_KERNELS=python`` forces the fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_FORCED = os.environ.get("CYLAB_KERNELS", "").strip().lower()

if _ckernels is not None and _FORCED != "python":
    _impl: ModuleType = _ckernels
    BACKEND = "compiled"
else:
    _impl = _pykernels
    BACKEND = "python"

lattice_walk = _impl.lattice_walk
local_time_hit = _impl.local_time_hit
cylinder_slab_exit = _impl.cylinder_slab_exit
slab_crossing = _impl.slab_crossing


def available_backends() -> list[str]:
    """Names of the kernel backends importable in this environment."""
    names = ["python"]
    if _ckernels is not None:
        names.insert(0, "compiled")
    return names


def get_backend(name: str) -> ModuleType:
    """Return the kernel module for ``name`` ("compiled" or "python")."""
    if name == "python":
        return _pykernels
    if name == "compiled":
        if _ckernels is None:
            raise ImportError("compiled kernels were not built")
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


__all__ = [
    "BACKEND",
    "available_backends",
    "cylinder_slab_exit",
    "get_backend",
    "lattice_walk",
    "local_time_hit",
    "slab_crossing",
]
