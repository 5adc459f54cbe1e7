"""Selects the compiled Jacobi kernel when available.

Set ``QUASINORMAL_PURE=1`` to force the numpy fallback.
"""
import os

from . import _jacobi_py

BACKEND = "python"
jacobi_eigh = _jacobi_py.jacobi_eigh

if os.environ.get("QUASINORMAL_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _jacobi_ext
    except ImportError:
        pass
    else:
        jacobi_eigh = _jacobi_ext.jacobi_eigh
        BACKEND = "compiled"

pure_jacobi_eigh = _jacobi_py.jacobi_eigh
