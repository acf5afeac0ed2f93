"""Hot kernels: the compiled extension when it is built, the pure-Python twin otherwise.

Set ``SEMIHEAT_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("SEMIHEAT_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernels as kernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels
        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _pykernels as kernels
        BACKEND = "python"

from . import _pykernels as pykernels

__all__ = ["kernels", "pykernels", "BACKEND"]
