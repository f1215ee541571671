"""Sweep-kernel backend selection.

The compiled Cython kernel is preferred; the pure-Python kernel is the
fallback.  Set GRIDSIM_EV_PURE_PYTHON=1 to force the fallback (used by
the benchmark and by CI environments without a compiler).
"""

import os

if os.environ.get("GRIDSIM_EV_PURE_PYTHON"):
    from ._sweep_py import run_sweep

    BACKEND = "python"
else:
    try:
        from ._sweep_cy import run_sweep  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        from ._sweep_py import run_sweep  # type: ignore[no-redef]

        BACKEND = "python"

__all__ = ["run_sweep", "BACKEND"]
