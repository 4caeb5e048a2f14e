"""Monte Carlo estimates with standard errors."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from scipy import stats


class Method(str, enum.Enum):
    EXACT = "exact"
    MC_PAIRED = "mc_paired"
    MC_PLAIN = "mc_plain"
    SERIES = "series"


@dataclass(frozen=True)
class Estimate:
    """A scalar estimate with its standard error.

    Exact and series values carry ``std_error == 0``.
    """

    mean: float
    std_error: float = 0.0
    n_samples: int = 0
    method: Method = Method.EXACT

    def __post_init__(self):
        if self.std_error < 0 or math.isnan(self.std_error):
            raise ValueError("std_error must be non-negative")
        if self.method in (Method.EXACT, Method.SERIES) and self.std_error != 0:
            raise ValueError("exact estimates have zero standard error")

    @classmethod
    def exact(cls, value: float) -> Estimate:
        return cls(float(value), 0.0, 0, Method.EXACT)

    @classmethod
    def binomial(cls, successes: int, trials: int) -> Estimate:
        """Fraction of successes with the binomial standard error."""
        if trials <= 0:
            raise ValueError("binomial estimate needs at least one trial")
        p = successes / trials
        return cls(p, math.sqrt(p * (1.0 - p) / trials), trials, Method.MC_PLAIN)

    @property
    def is_exact(self) -> bool:
        return self.std_error == 0.0

    def interval(self, z: float = 1.96) -> tuple[float, float]:
        return self.mean - z * self.std_error, self.mean + z * self.std_error

    def confidence_interval(self, level: float = 0.95) -> tuple[float, float]:
        return self.interval(stats.norm.ppf(0.5 + level / 2.0))

    def covers(self, value: float, k: float = 3.0) -> bool:
        """Whether ``value`` lies within ``k`` standard errors of the mean."""
        return abs(self.mean - value) <= k * self.std_error

    def __float__(self) -> float:
        return self.mean
