"""Pick the kernel implementation once, at import.

The compiled extension is used when it imports cleanly; otherwise the NumPy
fallback. Set ``SHELF_LAB_PURE=1`` to force the fallback.
"""

import os

if os.environ.get("SHELF_LAB_PURE", "") not in ("", "0"):
    from . import _pykernels as kernels
else:
    try:
        from . import _ckernels as kernels
    except ImportError:  # extension not built
        from . import _pykernels as kernels

BACKEND = kernels.BACKEND

__all__ = ["kernels", "BACKEND"]
