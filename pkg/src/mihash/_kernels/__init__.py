"""Kernel backend selection.

MIHASH_BACKEND environment variable:
  auto     (default) use the compiled extension when importable, else NumPy
  compiled require the extension; raise if it is missing
  python   force the NumPy fallback

Both backends satisfy the same bit-for-bit contract (see _fallback.py), so
the choice only affects speed.
"""
import os

from ..errors import ConfigError
from . import _fallback

_requested = os.environ.get("MIHASH_BACKEND", "auto").strip().lower()
if _requested not in ("auto", "compiled", "python"):
    raise ConfigError(
        f"MIHASH_BACKEND must be auto, compiled, or python (got {_requested!r})")

if _requested == "python":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise ConfigError(
                "MIHASH_BACKEND=compiled but the extension is not built; "
                "reinstall with Cython available or use MIHASH_BACKEND=python")
        _impl = _fallback
        BACKEND = "python"

pair_counts = _impl.pair_counts
mi_grad_gather = _impl.mi_grad_gather
hamming_many = _impl.hamming_many

__all__ = ["BACKEND", "pair_counts", "mi_grad_gather", "hamming_many"]
