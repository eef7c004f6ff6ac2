"""Counter-based random draws keyed by fault coordinates.

Every draw is a pure function of (seed, step, array id, instance, replica,
stream), so a campaign injects the same faults no matter which worker
evaluates which instance, or in what order.
"""
from __future__ import annotations

import numpy as np

_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z):
    # splitmix64 finalizer; works on Python ints (masked) and uint64 arrays
    if isinstance(z, int):
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
        return z ^ (z >> 31)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _absorb(h, word):
    if isinstance(h, int):
        return _mix(((h ^ (word & _M64)) + _GOLDEN) & _M64)
    return _mix((h ^ word) + np.uint64(_GOLDEN))


def stream_key(seed: int, step: int, array_id: int, replica: int, stream: int) -> int:
    """Key for all instances of one (step, array, replica, stream)."""
    h = _mix(((seed & _M64) + _GOLDEN) & _M64)
    for word in (step, array_id, replica, stream):
        h = _absorb(h, word)
    return h


def draw(seed: int, step: int, array_id: int, index, replica: int, stream: int):
    """64-bit draw(s); ``index`` may be an int or an integer ndarray."""
    key = stream_key(seed, step, array_id, replica, stream)
    if isinstance(index, (int, np.integer)):
        return _absorb(key, int(index))
    with np.errstate(over="ignore"):
        return _absorb(np.uint64(key), np.asarray(index, dtype=np.uint64))


def uniform(bits):
    """Map 64-bit draws to [0, 1) with 53 bits of resolution."""
    if isinstance(bits, int):
        return (bits >> 11) * 2.0 ** -53
    return (bits >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
