"""Kernel selection: compiled extension when built, numpy fallback otherwise.

Set MEMBRANE_LAB_NO_ACCEL=1 to force the numpy path (the benchmark uses both
explicitly through `available_backends`).
"""

from __future__ import annotations

import os

from . import _accel_np

if os.environ.get("MEMBRANE_LAB_NO_ACCEL") == "1":
    _impl = _accel_np
else:
    try:
        from . import _accel as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _accel_np

BACKEND: str = _impl.BACKEND
membrane_rhs = _impl.membrane_rhs


def available_backends() -> dict:
    """Name -> membrane_rhs callable for every importable backend."""
    out = {"numpy": _accel_np.membrane_rhs}
    try:
        from . import _accel

        out["cython"] = _accel.membrane_rhs
    except ImportError:
        pass
    return out
