"""Kernel backend selection.

The hot per-region scans (statistics, sign-cut masks, axis profiles) have
two interchangeable implementations: a compiled Cython extension and a
numpy fallback.  The extension is preferred when importable; setting
``ADAPTSEG_KERNELS=python`` or ``ADAPTSEG_KERNELS=cython`` forces one
side (the latter raises if the extension is missing).
"""

import os

_forced = os.environ.get("ADAPTSEG_KERNELS", "").strip().lower()
if _forced not in ("", "python", "cython"):
    raise RuntimeError(
        f"ADAPTSEG_KERNELS must be 'python' or 'cython', got {_forced!r}"
    )

if _forced == "python":
    from . import _reference as _impl
else:
    try:
        from . import _speed as _impl  # type: ignore[no-redef]
    except ImportError:
        if _forced == "cython":
            raise
        from . import _reference as _impl

BACKEND = _impl.BACKEND_NAME

stats_1d = _impl.stats_1d
abs_dev_sum = _impl.abs_dev_sum
sign_mask = _impl.sign_mask
masked_sum = _impl.masked_sum
bbox = _impl.bbox
coord_counts = _impl.coord_counts
coord_sums = _impl.coord_sums
