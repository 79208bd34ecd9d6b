"""Hot-loop kernels: compiled extension if importable, numpy fallback otherwise.

Set ``FOLIAMOD_PURE_PYTHON=1`` to force the fallback. ``BACKEND`` names the
implementation in use.
"""

import os

from . import _kernels_py

if os.environ.get("FOLIAMOD_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

project_simplex = _impl.project_simplex
solve_simplex = _impl.solve_simplex

__all__ = ["BACKEND", "project_simplex", "solve_simplex"]
