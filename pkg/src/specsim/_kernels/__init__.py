"""Kernel selection: compiled extension when available, pure Python otherwise.

Set SPECSIM_PURE=1 to force the fallback (used by tests and benchmarks to
compare both implementations).
"""

from __future__ import annotations

import os

from . import _pure

if os.environ.get("SPECSIM_PURE"):
    _impl = _pure
else:
    try:
        from . import _speed as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

common_prefix_len = _impl.common_prefix_len
common_suffix_len = _impl.common_suffix_len
levenshtein = _impl.levenshtein

IMPLEMENTATION = "compiled" if _impl.__name__.endswith("_speed") else "pure"

__all__ = ["common_prefix_len", "common_suffix_len", "levenshtein", "IMPLEMENTATION"]
