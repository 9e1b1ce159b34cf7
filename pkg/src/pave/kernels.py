"""Select the compiled kernels when available, else the pure-Python ones.

Set ``PAVE_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("PAVE_PURE_PYTHON"):
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _kernels_py

dijkstra = _impl.dijkstra
nearest_index = _impl.nearest_index
min_distances = _impl.min_distances


def available_backends():
    """Mapping of backend name to kernel module, for tests and benchmarks."""
    out = {"python": _kernels_py}
    try:
        from . import _speedups

        out["cython"] = _speedups
    except ImportError:  # pragma: no cover
        pass
    return out
