"""Leading-order values: either "typically exactly zero" or c * n**gamma.

The combination rules here mirror how such leading orders behave under
sums, maxima, minima and multiplication by n.  Exponents produced by the
engines are sums of a handful of floats, so ties are compared with a small
tolerance instead of exact float equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

GAMMA_TIE_TOL = 1e-9


@dataclass(frozen=True)
class Pow:
    """c * n**gamma with c > 0."""

    c: float
    gamma: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"Pow coefficient must be positive, got {self.c}")

    def value_at(self, n: float) -> float:
        return self.c * n ** self.gamma

    def __repr__(self) -> str:
        return f"Pow({self.c:g}, {self.gamma:g})"


class _Zero:
    """The leading order of a quantity that is typically exactly 0."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def value_at(self, n: float) -> float:
        return 0.0

    def __repr__(self) -> str:
        return "Zero"


ZERO = _Zero()
Asym = Union[Pow, _Zero]


def is_zero(a: Asym) -> bool:
    return a is ZERO or isinstance(a, _Zero)


def _gamma_close(x: float, y: float) -> bool:
    return abs(x - y) <= GAMMA_TIE_TOL * max(1.0, abs(x), abs(y))


def asym_sum(items: Iterable[Asym]) -> Asym:
    """Sum: the largest exponent wins; coefficients at that exponent add."""
    best_gamma = None
    coeff = 0.0
    for a in items:
        if is_zero(a):
            continue
        if best_gamma is None or a.gamma > best_gamma + GAMMA_TIE_TOL:
            best_gamma = a.gamma
            coeff = a.c
        elif _gamma_close(a.gamma, best_gamma):
            coeff += a.c
    if best_gamma is None:
        return ZERO
    return Pow(coeff, best_gamma)


def asym_max(items: Iterable[Asym]) -> Asym:
    """Max: lexicographic in (gamma, c); any positive order beats Zero."""
    best = None
    for a in items:
        if is_zero(a):
            continue
        if best is None:
            best = a
        elif a.gamma > best.gamma + GAMMA_TIE_TOL:
            best = a
        elif _gamma_close(a.gamma, best.gamma) and a.c > best.c:
            best = Pow(a.c, best.gamma)
    return ZERO if best is None else best


def asym_min(items: Iterable[Asym]) -> Asym:
    """Min: Zero absorbs; otherwise lexicographic minimum in (gamma, c)."""
    best = None
    for a in items:
        if is_zero(a):
            return ZERO
        if best is None:
            best = a
        elif a.gamma < best.gamma - GAMMA_TIE_TOL:
            best = a
        elif _gamma_close(a.gamma, best.gamma) and a.c < best.c:
            best = Pow(a.c, best.gamma)
    if best is None:
        raise ValueError("asym_min of no items")
    return best


def asym_scale(a: Asym, factor: float, gamma_shift: float = 0.0) -> Asym:
    """factor * n**gamma_shift times a, for factor > 0."""
    if factor <= 0:
        raise ValueError("scale factor must be positive")
    if is_zero(a):
        return ZERO
    return Pow(a.c * factor, a.gamma + gamma_shift)


def asym_times_n(a: Asym) -> Asym:
    return asym_scale(a, 1.0, 1.0)
