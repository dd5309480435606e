from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LogGrid:
    """Logarithmically spaced points on [lo, hi]."""

    points: int = 241
    lo: float = 1e-6
    hi: float = 1e6

    def __post_init__(self):
        if self.points < 1 or not (0 < self.lo <= self.hi):
            raise ValueError(f"bad grid {self}")

    def values(self) -> np.ndarray:
        if self.points == 1:
            return np.array([self.lo])
        return np.logspace(np.log10(self.lo), np.log10(self.hi), self.points)

    def describe(self) -> dict:
        return {"kind": "log", "points": self.points, "lo": self.lo, "hi": self.hi}
