"""Kernel selection: compiled extension if available, NumPy otherwise.

Set ``DESCBOUND_PURE=1`` to force the NumPy fallback (useful for testing
and for comparing the two implementations; they are bit-identical).
"""

from __future__ import annotations

import os

if os.environ.get("DESCBOUND_PURE", "") == "1":
    from . import fallback as _impl
    HAVE_EXTENSION = False
else:
    try:
        from . import _mc as _impl  # type: ignore[attr-defined]
        HAVE_EXTENSION = True
    except ImportError:
        from . import fallback as _impl
        HAVE_EXTENSION = False

backend_name = _impl.backend_name
chernoff_tail_count = _impl.chernoff_tail_count
coverage_violation_count = _impl.coverage_violation_count

__all__ = [
    "HAVE_EXTENSION",
    "backend_name",
    "chernoff_tail_count",
    "coverage_violation_count",
]
