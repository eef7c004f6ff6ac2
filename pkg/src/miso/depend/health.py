"""Sliding-window mismatch tracking for suspected permanent faults."""
from __future__ import annotations

import numpy as np


class CellHealth:
    """Per-instance ring buffers of mismatch flags for one array.

    An instance is flagged once the number of mismatches among its last
    ``window`` steps reaches ``threshold * window``; the flag is sticky.
    """

    def __init__(self, size: int, window: int = 100, threshold: float = 0.1):
        if window < 1:
            raise ValueError("health window must be >= 1")
        if not 0.0 < threshold <= 1.0:
            raise ValueError("health threshold must be in (0, 1]")
        self.window = window
        self.threshold = threshold
        self.ring = np.zeros((window, size), dtype=bool)
        self.slot = 0
        self.steps = 0
        self.in_window = np.zeros(size, dtype=np.int64)
        self.total = np.zeros(size, dtype=np.int64)
        self.flagged = np.zeros(size, dtype=bool)

    def update(self, step: int, mismatched) -> "CellHealth":
        mismatched = np.broadcast_to(np.asarray(mismatched, dtype=bool), self.total.shape)
        self.in_window -= self.ring[self.slot]
        self.ring[self.slot] = mismatched
        self.in_window += mismatched
        self.total += mismatched
        self.slot = (self.slot + 1) % self.window
        self.steps += 1
        self.flagged |= self.in_window / self.window >= self.threshold
        return self


def update_health(health: CellHealth, step: int, mismatched) -> CellHealth:
    return health.update(step, mismatched)
