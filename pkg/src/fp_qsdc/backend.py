"""Select the compiled kernel core or the pure-python fallback.

The compiled Cython extension is preferred when importable.  Set
``FP_QSDC_BACKEND=python`` (or ``compiled``) to force a choice; forcing
``compiled`` raises immediately if the extension is missing, instead of
silently degrading.
"""

from __future__ import annotations

import os

from . import _core_py

_requested = os.environ.get("FP_QSDC_BACKEND", "auto").lower()

if _requested not in ("auto", "compiled", "python"):
    raise RuntimeError(
        f"FP_QSDC_BACKEND={_requested!r} not understood "
        "(use 'auto', 'compiled' or 'python')")

if _requested == "python":
    _impl = _core_py
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise RuntimeError(
                "FP_QSDC_BACKEND=compiled but the fp_qsdc._core extension "
                "is not built; run `pip install -e .` or `python setup.py "
                "build_ext --inplace`")
        _impl = _core_py
        BACKEND = "python"

AXIS_Z = _core_py.AXIS_Z
AXIS_X = _core_py.AXIS_X
AXIS_Y = _core_py.AXIS_Y

density_grid = _impl.density_grid
click_grid = _impl.click_grid
yield_grid = _impl.yield_grid
herm_eig = _impl.herm_eig
