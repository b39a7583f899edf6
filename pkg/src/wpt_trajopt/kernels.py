"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``WPT_TRAJOPT_PURE=1`` to force the fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

__all__ = ["BACKEND", "hfh_search", "dp_frontier", "get_backend", "available_backends"]


def _load_compiled() -> ModuleType | None:
    if os.environ.get("WPT_TRAJOPT_PURE", "").strip() not in ("", "0"):
        return None
    try:
        from . import _ckernels  # type: ignore[attr-defined]
    except ImportError:
        return None
    return _ckernels


_compiled = _load_compiled()
_active: ModuleType = _compiled if _compiled is not None else _pykernels

BACKEND: str = _active.BACKEND
hfh_search = _active.hfh_search
dp_frontier = _active.dp_frontier


def available_backends() -> dict[str, ModuleType]:
    out = {"python": _pykernels}
    try:
        from . import _ckernels  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out


def get_backend(name: str) -> ModuleType:
    backends = available_backends()
    if name not in backends:
        raise LookupError(f"kernel backend {name!r} is not available (have {sorted(backends)})")
    return backends[name]
