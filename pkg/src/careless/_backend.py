"""Pick the kernel implementation at import time.

The compiled ``_kernels`` extension is used when it imports; set
``CARELESS_PURE_PYTHON=1`` to force the pure-Python fallback.
"""
import os

from . import _pykernels

if os.environ.get("CARELESS_PURE_PYTHON"):
    kernels = _pykernels
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _pykernels

BACKEND = kernels.NAME
