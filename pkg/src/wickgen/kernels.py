"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback. Setting ``WICKGEN_PURE=1`` forces the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
if os.environ.get("WICKGEN_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

rref_modp = _impl.rref_modp
enumerate_multigraphs = _impl.enumerate_multigraphs

__all__ = ["BACKEND", "rref_modp", "enumerate_multigraphs"]
