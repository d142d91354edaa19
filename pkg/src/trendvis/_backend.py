"""Kernel selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. ``TRENDVIS_BACKEND=python`` forces the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

kernels = _kernels_py
if os.environ.get("TRENDVIS_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        pass

BACKEND: str = kernels.BACKEND
