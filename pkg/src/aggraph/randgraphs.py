"""Random graph regimes and sampling.

Sampling is keyed, not sequential: replicate r of a run with seed s is
drawn from a Philox stream keyed by (s, r), so any replicate can be
regenerated alone and results do not depend on scheduling order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InputError
from .graphs import Graph


@dataclass(frozen=True)
class Dense:
    """Constant edge probability p in (0, 1)."""

    p: float

    def __post_init__(self):
        if not (0.0 < self.p < 1.0):
            raise InputError(f"dense regime needs 0 < p < 1, got {self.p}")

    def probability(self, n: int) -> float:
        return self.p


@dataclass(frozen=True)
class Sparse:
    """Edge probability n**(-alpha), alpha in (0, 1) and irrational in use.

    guard_tol is the margin the density comparisons use to decide e*alpha
    vs v; see the irrationality guard in the closure machinery.
    """

    alpha: float
    guard_tol: float = 1e-9

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise InputError(f"sparse regime needs 0 < alpha < 1, got {self.alpha}")
        if self.guard_tol <= 0:
            raise InputError("guard_tol must be positive")

    def probability(self, n: int) -> float:
        return float(n) ** (-self.alpha)


Regime = Dense | Sparse


def edge_probability(regime: Regime, n: int) -> float:
    if n < 1:
        raise InputError(f"need n >= 1, got {n}")
    return regime.probability(n)


@lru_cache(maxsize=8)
def _pair_array(n: int) -> np.ndarray:
    iu = np.triu_indices(n, k=1)
    return np.stack(iu, axis=1).astype(np.int64)


def sample(n: int, regime: Regime, seed: int, replicate: int = 0) -> Graph:
    """One draw of the binomial random graph on n vertices."""
    if n < 1:
        raise InputError(f"need n >= 1, got {n}")
    if replicate < 0:
        raise InputError("replicate index must be nonnegative")
    p = edge_probability(regime, n)
    if n == 1:
        return Graph(1, [])
    rng = np.random.Generator(np.random.Philox(key=(int(seed) << 64) | replicate))
    mask = rng.random(n * (n - 1) // 2) < p
    return Graph._from_sorted_array(n, _pair_array(n)[mask])
