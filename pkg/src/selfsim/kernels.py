"""Backend selection for the Euler kernels.

The compiled extension ``selfsim._ceuler`` is used when it imports; the
pure-Python module ``selfsim._pykernels`` is the fallback.  Setting
``SELFSIM_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pykernels as python_backend

compiled_backend = None
if not os.environ.get("SELFSIM_PURE_PYTHON"):
    try:
        from . import _ceuler as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

euler = compiled_backend if compiled_backend is not None else python_backend
BACKEND = euler.BACKEND

__all__ = ["BACKEND", "compiled_backend", "euler", "python_backend"]
