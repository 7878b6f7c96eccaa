"""Raster kernel selection: compiled extension when available, numpy otherwise.

Set ANNOFORGE_PURE_PYTHON=1 to force the fallback (used by the parity tests
and the benchmark).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("ANNOFORGE_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

pixel_counts = _impl.pixel_counts
