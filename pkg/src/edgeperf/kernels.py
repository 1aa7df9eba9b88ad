"""Pick the compiled selection kernels when available.

Set ``EDGEPERF_PURE_PYTHON=1`` to force the numpy fallback.
"""

from __future__ import annotations

import os

BACKEND = "python"
if os.environ.get("EDGEPERF_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._kernels import select_p1, select_p2

        BACKEND = "cython"
    except ImportError:
        pass
if BACKEND == "python":
    from ._kernels_py import select_p1, select_p2

__all__ = ["BACKEND", "select_p1", "select_p2"]
