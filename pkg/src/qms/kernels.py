"""Backend selection for the Green-function kernels.

The compiled extension is used when it was built; otherwise the numpy
fallback is imported. Setting ``QMS_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("QMS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

green_block = _impl.green_block
green_matrix = _impl.green_matrix
green_project = _impl.green_project
lattice_sum = _impl.lattice_sum


def get_backend(name=None):
    """Return the kernel namespace for ``name`` ('cython', 'python' or None for active)."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")
