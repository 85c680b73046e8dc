"""Hot numerical kernels, compiled when available.

The Cython extension ``_ckernels`` is used when it was built and importable;
otherwise the pure-Python ``_pykernels`` are used.  Setting the environment
variable ``ARTIFACT_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pykernels as python_backend

compiled_backend = None
if os.environ.get("ARTIFACT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

cgamma = _active.cgamma
jackson_apply = _active.jackson_apply
dp45_extend = _active.dp45_extend

__all__ = ["BACKEND", "cgamma", "jackson_apply", "dp45_extend",
           "python_backend", "compiled_backend"]
