"""Best-effort glibc allocator tuning for the training loop.

Per-step temporaries (a few hundred KB each) sit above glibc's default mmap
threshold, so every allocation would otherwise map and fault in fresh pages.
"""

import ctypes
import ctypes.util
import sys

_M_TRIM_THRESHOLD = -1
_M_TOP_PAD = -2
_M_MMAP_THRESHOLD = -3

_done = False


def tune_allocator() -> bool:
    global _done
    if _done or not sys.platform.startswith("linux"):
        return _done
    try:
        libc = ctypes.CDLL(ctypes.util.find_library("c") or "libc.so.6")
        libc.mallopt(_M_MMAP_THRESHOLD, 64 * 1024 * 1024)
        libc.mallopt(_M_TRIM_THRESHOLD, 256 * 1024 * 1024)
        libc.mallopt(_M_TOP_PAD, 64 * 1024 * 1024)
        _done = True
    except (OSError, AttributeError):
        pass
    return _done
