"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the NumPy
implementation takes over. Set ``VESAEA_BACKEND=python`` to force the
fallback (``VESAEA_BACKEND=cython`` makes a missing extension an error).
"""

from __future__ import annotations

import os

from . import _kernels_py

_requested = os.environ.get("VESAEA_BACKEND", "auto").strip().lower()

if _requested == "python":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _requested == "cython":
            raise
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"

nearest_site = _impl.nearest_site
tps_eval = _impl.tps_eval
top_membership = _impl.top_membership
scale_unit = _impl.scale_unit


def backends() -> dict:
    """All importable implementations, keyed by name (used by the benchmark)."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels  # type: ignore[attr-defined]

        found["cython"] = _kernels
    except ImportError:
        pass
    return found
