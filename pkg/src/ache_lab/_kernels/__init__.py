"""Kernel backend selection.

The compiled Cython kernels are used when importable; otherwise the NumPy
fallback is selected. Set ACHE_LAB_FORCE_PY=1 to force the fallback (used by
the benchmark and for debugging).
"""

import os

if os.environ.get("ACHE_LAB_FORCE_PY") == "1":
    from . import _series_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _series_cy as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _series_py as _impl

        BACKEND = "python"

conv = _impl.conv
inv_unit = _impl.inv_unit
sqrt_unit = _impl.sqrt_unit

__all__ = ["conv", "inv_unit", "sqrt_unit", "BACKEND"]
