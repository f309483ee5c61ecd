"""Solver backend selection: compiled core when built, numpy fallback otherwise.

Set ``BAITPRESS_PURE_PYTHON=1`` to force the fallback (useful for debugging
and for the backend-comparison benchmark).
"""

from __future__ import annotations

import os

if os.environ.get("BAITPRESS_PURE_PYTHON"):
    from . import _pykernels as _impl
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _pykernels as _impl  # type: ignore[no-redef]

BACKEND: str = _impl.BACKEND
svr_pass = _impl.svr_pass
svc_pass = _impl.svc_pass
