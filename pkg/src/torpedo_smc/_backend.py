"""Select the integration kernel backend at import time.

The compiled Cython module is preferred; set ``TORPEDO_SMC_PURE_PYTHON=1``
to force the numpy fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("TORPEDO_SMC_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

rk4_affine = _impl.rk4_affine
rk4_affine_trajectory = _impl.rk4_affine_trajectory

__all__ = ["BACKEND", "rk4_affine", "rk4_affine_trajectory"]
