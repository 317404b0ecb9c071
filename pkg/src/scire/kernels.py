"""Backend selection for the RK4 reference kernels.

The compiled extension is preferred when it was built; the pure-Python
module is a drop-in replacement. Set SCIRE_PURE_PYTHON=1 to force the
fallback (the benchmark uses this to compare the two).
"""
from __future__ import annotations

import os

if os.environ.get("SCIRE_PURE_PYTHON", "") not in ("", "0"):
    from scire import _pykernels as _impl
else:
    try:
        from scire import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        from scire import _pykernels as _impl  # type: ignore[no-redef]

backend = _impl.BACKEND
rk4_poly = _impl.rk4_poly
rk4_linear_state = _impl.rk4_linear_state
