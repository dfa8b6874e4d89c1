from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean with its standard error over the uncensored replicas."""

    mean: float
    std_error: float
    n: int
    censored_fraction: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("an estimate needs at least one replica")
        if not self.std_error >= 0.0:
            raise ValueError("standard error must be non-negative")

    @classmethod
    def from_samples(cls, values, censored=None) -> "MCEstimate":
        values = np.asarray(values, dtype=float)
        total = values.size
        if censored is not None:
            values = values[~np.asarray(censored, dtype=bool)]
        n = values.size
        if n == 0:
            raise RuntimeError("every replica was censored")
        mean = float(np.mean(values))
        se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(mean, se, n, 1.0 - n / total)

    def scaled(self, factor: float) -> "MCEstimate":
        return MCEstimate(self.mean * factor, self.std_error * abs(factor), self.n, self.censored_fraction)

    @property
    def biased(self) -> bool:
        """Censoring above 0.1% of replicas makes the mean unreliable."""
        return self.censored_fraction > 1e-3

    def __str__(self):
        return f"{self.mean:.6g} +/- {self.std_error:.2g} (n={self.n})"
