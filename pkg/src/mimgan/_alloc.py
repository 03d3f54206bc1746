"""glibc allocator tuning for the large per-step temporaries of training.

Phase-2 generator steps allocate and free many multi-megabyte arrays.  By
default glibc serves each from a fresh ``mmap`` and returns it on free, so
every step pays the page-fault cost again.  Raising the mmap and trim
thresholds keeps those pages on the heap.  Results are unaffected.
"""

from __future__ import annotations

import ctypes
import ctypes.util

_M_TRIM_THRESHOLD = -1
_M_MMAP_THRESHOLD = -3
_done = False


def tune_allocator() -> bool:
    """Apply the thresholds once per process; False where glibc is absent."""
    global _done
    if _done:
        return True
    name = ctypes.util.find_library("c")
    if not name:
        return False
    try:
        libc = ctypes.CDLL(name)
        mallopt = libc.mallopt
    except (OSError, AttributeError):
        return False
    ok = mallopt(_M_MMAP_THRESHOLD, 1 << 30) == 1 and mallopt(_M_TRIM_THRESHOLD, (1 << 31) - 1) == 1
    _done = ok
    return ok
