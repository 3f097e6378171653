"""Kernel selection: compiled extension when available, pure Python otherwise.

Set MATCHKIT_PURE_PYTHON=1 to force the fallback regardless of what was
built.  `backend_name()` reports which implementation is active.
"""

import os

from . import pure as _pure

if os.environ.get("MATCHKIT_PURE_PYTHON") == "1":
    _impl = _pure
else:
    try:
        from . import _ckern as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pure

UNRANKED = _pure.UNRANKED
WEAK, STRONG, SUPER = _pure.WEAK, _pure.STRONG, _pure.SUPER

enum_bipartite = _impl.enum_bipartite
enum_sr = _impl.enum_sr
stable_mask_bipartite = _impl.stable_mask_bipartite
stable_mask_sr = _impl.stable_mask_sr
stable_mask_spas = _impl.stable_mask_spas
best_profile_index = _impl.best_profile_index


def backend_name() -> str:
    return "compiled" if _impl is not _pure else "pure"
