"""Backend selection for the hot kernels.

The compiled Cython module is used when it imports cleanly; otherwise the
numpy fallback is used.  Setting ``MULTIBIN_PURE_PYTHON=1`` forces the
fallback, which is how the benchmark and the backend-agreement tests
exercise both paths.
"""

import os

from . import _kernels_py

if os.environ.get("MULTIBIN_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

window_sum = _impl.window_sum
em_solve = _impl.em_solve

__all__ = ["BACKEND", "window_sum", "em_solve"]
