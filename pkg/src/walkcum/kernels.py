"""Select the compiled core or the pure-Python fallback at import time.

Set ``WALKCUM_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _fallback

BACKEND = "python"
census_counts = _fallback.census_counts
triangle_weight_sum = _fallback.triangle_weight_sum

if os.environ.get("WALKCUM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core
    except ImportError:
        pass
    else:
        census_counts = _core.census_counts
        triangle_weight_sum = _core.triangle_weight_sum
        BACKEND = "compiled"

__all__ = ["BACKEND", "census_counts", "triangle_weight_sum"]
