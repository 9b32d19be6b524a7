"""Numerical class checks for connectives.

Three checkers live here: the relative-Lipschitz quotient battery, the
power-envelope bound, and the concentration-transfer trial.  All of them
sample, so they can refute membership or fail to refute it, never prove
it; `promote` records a surviving user connective with an "empirical"
certificate, keeping it distinguishable from the constructed builtins.

The battery walks multiplicative and additive straddles around geometric
rays, including directions squeezed toward the diagonal by factors down
to 1e-9.  Difference-like functions degenerate exactly there, which is
what makes the battery able to refute them with concrete witness pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .connectives import (
    Connective,
    SPEC_ZERO,
    certified_copy,
    domdiff,
    make_user_connective,
    sigmoid,
)
from .errors import EvaluationError, InputError

DEFAULT_C_BOUND = 1e6
# The upper end must sit far above C_BOUND**2: the planted diagonal
# violations have quotients growing like sqrt(hi), so a shorter box
# would wrongly clear them.
DEFAULT_BOX = (1e-4, 1e14)
DEFAULT_SEED = 20260816

_T_POINTS = 9
_DELTAS = (1e-1, 1e-3, 1e-5, 1e-7, 1e-9)
_DIAGONAL_SQUEEZE = (1e-1, 1e-2, 1e-4, 1e-6, 1e-8, 1e-9)
_RANDOM_DIRECTIONS = 6
_STRADDLE_OFFSETS = (math.pi / 2, 1.0, 3.0)

A_GRID = (1.0, 1.5, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0, 50.0, 100.0)
B_GRID = (1.0, 1.5, 2.0, 3.0, 5.0, 8.0, 12.0)


@dataclass(frozen=True)
class LipReport:
    """Outcome of the relative-Lipschitz battery.

    estimated_c is the largest quotient observed over every positive
    specialization; the witness (spec indices, x, y, quotient) is kept
    only on failure and reproduces the violation when re-evaluated.
    """

    verdict: str
    estimated_c: float
    witness: tuple | None
    samples: int
    box: tuple[float, float]
    c_bound: float
    per_spec: dict[tuple[int, ...], float]


def pair_battery(m: int, box: tuple[float, float] = DEFAULT_BOX,
                 samples: int = 1000, seed: int = DEFAULT_SEED
                 ) -> list[tuple[np.ndarray, np.ndarray]]:
    """Deterministic battery of positive point pairs in dimension m."""
    lo, hi = box
    if not (0.0 < lo < hi):
        raise InputError("box must satisfy 0 < lo < hi")
    if m < 1:
        raise InputError("dimension must be >= 1")
    rng = np.random.default_rng(seed)
    ts = np.geomspace(lo, hi, _T_POINTS)
    dirs = [np.ones(m)]
    if m > 1:
        for _ in range(_RANDOM_DIRECTIONS):
            d = np.exp(rng.uniform(0.0, math.log(hi / lo) / 4.0, size=m))
            dirs.append(d / np.linalg.norm(d))
        for z in _DIAGONAL_SQUEEZE:
            d = 1.0 + z * rng.uniform(-1.0, 1.0, size=m)
            dirs.append(d / np.linalg.norm(d))
    pairs: list[tuple[np.ndarray, np.ndarray]] = []
    for t in ts:
        for d in dirs:
            base = t * d
            for dl in _DELTAS:
                w = rng.uniform(-1.0, 1.0, size=m)
                pairs.append((base, base * (1.0 + dl)))
                pairs.append((base, base * (1.0 - dl)))
                pairs.append((base * (1.0 + dl * w), base * (1.0 - 2.0 * dl * w)))
            for h in _STRADDLE_OFFSETS:
                w = rng.uniform(0.25, 1.0, size=m) * rng.choice((-1.0, 1.0), size=m)
                x = base + h * w
                y = base - h * w
                if (x > 0).all() and (y > 0).all():
                    pairs.append((x, y))
    logs = rng.uniform(math.log(lo), math.log(hi), size=(samples, 2, m))
    for k in range(samples):
        pairs.append((np.exp(logs[k, 0]), np.exp(logs[k, 1])))
    return pairs


@lru_cache(maxsize=32)
def _battery_cached(m, box, samples, seed):
    return tuple(pair_battery(m, box, samples, seed))


def _quotient(fn, x: np.ndarray, y: np.ndarray, label: str) -> float | None:
    dxy = float(np.linalg.norm(x - y))
    if dxy == 0.0:
        return None
    fx = float(fn(tuple(x)))
    fy = float(fn(tuple(y)))
    if not (math.isfinite(fx) and math.isfinite(fy)):
        bad = tuple(x) if not math.isfinite(fx) else tuple(y)
        raise EvaluationError(f"{label or 'function'} is non-finite at {bad}")
    num = abs(fx - fy)
    if num == 0.0:
        return None
    den = fx + fy
    if den <= 0.0:
        return math.inf
    return (num / den) / (dxy / float(np.linalg.norm(x + y)))


def max_quotient(fn: Callable[[Sequence[float]], float],
                 pairs, *, label: str = ""
                 ) -> tuple[float, tuple[np.ndarray, np.ndarray] | None]:
    """Largest relative-Lipschitz quotient of fn over the given pairs."""
    best = 0.0
    best_pair = None
    for x, y in pairs:
        q = _quotient(fn, x, y, label)
        if q is not None and q > best:
            best = q
            best_pair = (x, y)
    return best, best_pair


def _nonempty_subsets(m: int):
    items = tuple(range(m))
    for mask in range(1, 1 << m):
        yield tuple(i for i in items if mask >> i & 1)


def check_relative_lipschitz(conn: Connective, *,
                             box: tuple[float, float] = DEFAULT_BOX,
                             samples: int = 1000,
                             seed: int = DEFAULT_SEED,
                             c_bound: float = DEFAULT_C_BOUND) -> LipReport:
    """Battery check of the relative-Lipschitz quotient, per specialization.

    Specializations reported identically zero are skipped (they satisfy
    the condition trivially); every positive one is tested in its own
    dimension.  Fails when any quotient exceeds c_bound.
    """
    per_spec: dict[tuple[int, ...], float] = {}
    worst = 0.0
    witness = None
    total = 0
    full = tuple(range(conn.arity))
    for spec in _nonempty_subsets(conn.arity):
        if conn.spec_kind(frozenset(spec)) == SPEC_ZERO:
            per_spec[spec] = 0.0
            continue
        fn = conn.eval if spec == full else conn.specialize(frozenset(spec))
        pairs = _battery_cached(len(spec), (float(box[0]), float(box[1])),
                                samples, seed)
        total += len(pairs)
        c, pair = max_quotient(fn, pairs, label=f"{conn.name}{list(spec)}")
        per_spec[spec] = c
        if c > worst:
            worst = c
            witness = None if pair is None else (
                spec, tuple(pair[0]), tuple(pair[1]), c)
    verdict = "pass" if worst <= c_bound else "fail"
    return LipReport(
        verdict=verdict,
        estimated_c=worst,
        witness=witness if verdict == "fail" else None,
        samples=total,
        box=box,
        c_bound=c_bound,
        per_spec=per_spec,
    )


def promote(conn: Connective, report: LipReport) -> Connective:
    """Certify a user connective after a passing battery check.

    The copy is flagged with an "empirical" certificate: good enough for
    engine admission, never confused with a constructed builtin.
    """
    if report.verdict != "pass":
        raise InputError(f"cannot promote {conn.name}: the battery check failed")
    return certified_copy(conn, is_rellip=True, certificate="empirical")


# ---------------------------------------------------------------------------
# Power envelope.


@dataclass(frozen=True)
class PowerBoundReport:
    verdict: str
    min_slack: float
    witness: tuple | None
    samples: int
    k_exponent: float
    c_const: float
    box: tuple[float, float]


def check_power_bound(conn: Connective, k_exponent: float, c_const: float, *,
                      box: tuple[float, float] = (1e-3, 1e3),
                      samples: int = 2000,
                      seed: int = DEFAULT_SEED) -> PowerBoundReport:
    """Check f(x) < c + sum_i (x_i**k + x_i**(-k)) on sampled positives.

    Points cover a geometric diagonal ladder, every low/high corner, and
    log-uniform draws.  A non-finite f value counts as a violation, so
    unboundedly growing functions fail instead of crashing the check.
    """
    if k_exponent <= 0:
        raise InputError("k_exponent must be positive")
    lo, hi = box
    if not (0.0 < lo < hi):
        raise InputError("box must satisfy 0 < lo < hi")
    m = conn.arity
    rng = np.random.default_rng(seed)
    pts = [np.full(m, t) for t in np.geomspace(lo, hi, 33)]
    if m <= 10:
        for mask in range(1 << m):
            pts.append(np.array([hi if mask >> j & 1 else lo for j in range(m)]))
    pts.extend(np.exp(rng.uniform(math.log(lo), math.log(hi), size=(samples, m))))
    worst = math.inf
    witness = None
    for x in pts:
        try:
            v = float(conn.eval(tuple(x)))
        except OverflowError:
            v = math.inf
        envelope = c_const + float(np.sum(x ** k_exponent + x ** (-k_exponent)))
        slack = envelope - v
        if math.isnan(slack):
            slack = -math.inf
        if slack < worst:
            worst = slack
            witness = tuple(float(c) for c in x)
    return PowerBoundReport(
        verdict="pass" if worst > 0 else "fail",
        min_slack=worst,
        witness=witness,
        samples=len(pts),
        k_exponent=k_exponent,
        c_const=c_const,
        box=box,
    )


# ---------------------------------------------------------------------------
# Concentration transfer.


@dataclass(frozen=True)
class TrialSpec:
    """Inputs for the concentration-transfer trial.

    centers[i] is either 0 or at least 1/scale_bound.  simulate(rng, size)
    must return a (size, arity) array whose coordinates are each 0 or
    inside [1/scale_bound, scale_bound], and deviate from their center by
    more than relative_radius * center with probability at most
    miss_probability (a zero center deviates whenever the draw is not 0).
    These hypotheses are themselves validated by sampling.
    """

    arity: int
    scale_bound: float
    miss_probability: float
    relative_radius: float
    centers: tuple[float, ...]
    simulate: Callable[[np.random.Generator, int], np.ndarray]
    trials: int = 4000


@dataclass(frozen=True)
class TransferReport:
    verdict: str
    a_hat: float | None
    b_hat: float | None
    center_value: float
    zero_center: bool
    deviation_rates: dict[float, float]
    range_rates: dict[float, float]
    trials: int
    rate_bound: float


def check_concentration_transfer(conn: Connective, trial: TrialSpec,
                                 seed: int = DEFAULT_SEED) -> TransferReport:
    """Find the smallest grid factors at which concentration transfers.

    Reports the smallest a with empirical P(|f(draw) - f(centers)| >
    a * radius * f(centers)) <= arity * miss_probability, and the smallest
    b confining f(draw) to {0} or [K**-b, K**b] at the same rate.  For a
    zero center value the first conclusion becomes P(f(draw) != 0).
    """
    if trial.arity != conn.arity:
        raise InputError("trial arity does not match the connective")
    K = trial.scale_bound
    if K <= 2.0:
        raise InputError("scale_bound must exceed 2")
    if trial.miss_probability <= 0 or trial.relative_radius <= 0:
        raise InputError("miss_probability and relative_radius must be positive")
    if len(trial.centers) != trial.arity:
        raise InputError("centers must match the arity")
    for c in trial.centers:
        if c != 0.0 and c < 1.0 / K:
            raise InputError(f"center {c} is neither 0 nor >= 1/K")
    if trial.trials < 100:
        raise InputError("need at least 100 trials")

    rng = np.random.default_rng(seed)
    draws = np.asarray(trial.simulate(rng, trial.trials), dtype=float)
    if draws.shape != (trial.trials, trial.arity):
        raise InputError(
            f"simulate returned shape {draws.shape}, "
            f"wanted {(trial.trials, trial.arity)}"
        )
    if not np.isfinite(draws).all() or (draws < 0).any():
        raise InputError("draws must be finite and nonnegative")
    in_range = (draws == 0.0) | (
        (draws >= (1.0 / K) * (1 - 1e-12)) & (draws <= K * (1 + 1e-12)))
    if not in_range.all():
        bad = draws[~in_range][0]
        raise InputError(f"draw {bad} escapes {{0}} union [1/K, K]")
    slack = 4.0 * math.sqrt(trial.miss_probability / trial.trials) + 2.0 / trial.trials
    for i, c in enumerate(trial.centers):
        col = draws[:, i]
        if c == 0.0:
            rate = float(np.mean(col != 0.0))
        else:
            rate = float(np.mean(np.abs(col - c) > trial.relative_radius * c))
        if rate > trial.miss_probability + slack:
            raise InputError(
                f"simulator violates its deviation hypothesis at coordinate "
                f"{i}: rate {rate:.4f} > {trial.miss_probability}"
            )

    vals = np.array([conn.eval(tuple(row)) for row in draws])
    center_value = float(conn.eval(trial.centers))
    bound = trial.arity * trial.miss_probability

    range_rates = {}
    b_hat = None
    for b in B_GRID:
        ok = (vals == 0.0) | (
            (vals >= K ** (-b) * (1 - 1e-9)) & (vals <= K ** b * (1 + 1e-9)))
        rate = float(np.mean(~ok))
        range_rates[b] = rate
        if b_hat is None and rate <= bound:
            b_hat = b

    deviation_rates = {}
    a_hat = None
    if center_value == 0.0:
        rate = float(np.mean(vals != 0.0))
        deviation_rates[A_GRID[0]] = rate
        if rate <= bound:
            a_hat = A_GRID[0]
    else:
        for a in A_GRID:
            rate = float(np.mean(
                np.abs(vals - center_value)
                > a * trial.relative_radius * center_value))
            deviation_rates[a] = rate
            if a_hat is None and rate <= bound:
                a_hat = a

    return TransferReport(
        verdict="pass" if (a_hat is not None and b_hat is not None) else "fail",
        a_hat=a_hat,
        b_hat=b_hat,
        center_value=center_value,
        zero_center=center_value == 0.0,
        deviation_rates=deviation_rates,
        range_rates=range_rates,
        trials=trial.trials,
        rate_bound=bound,
    )


# ---------------------------------------------------------------------------
# Fixture catalog.


@dataclass(frozen=True)
class Fixture:
    """A named function with its expected class verdicts.

    expect_asympoly is None when the question does not apply (functions
    already refuted by the quotient battery).
    """

    name: str
    connective: Connective
    expect_rellip: bool
    expect_asympoly: bool | None
    note: str


def fixtures() -> tuple[Fixture, ...]:
    """Catalog of positive and negative examples for the class checkers."""
    return (
        Fixture(
            "sq_diff",
            make_user_connective("sq_diff", 2, lambda a: (a[0] - a[1]) ** 2),
            expect_rellip=False,
            expect_asympoly=None,
            note="vanishes on the diagonal, so squeezed near-diagonal pairs "
                 "blow the quotient up",
        ),
        Fixture(
            "sq_diff_plus_y",
            make_user_connective(
                "sq_diff_plus_y", 2, lambda a: (a[0] - a[1]) ** 2 + a[1]),
            expect_rellip=False,
            expect_asympoly=None,
            note="the linear floor is too weak to tame the diagonal",
        ),
        Fixture(
            "sq_diff_plus_xsq",
            domdiff("sq_diff_plus_xsq", 2,
                    plus={(2, 0): 2.0, (0, 2): 1.0},
                    minus={(1, 1): 2.0}, eps=0.1),
            expect_rellip=True,
            expect_asympoly=True,
            note="dominant difference of positive quadratics; the quadratic "
                 "floor controls the diagonal",
        ),
        Fixture(
            "shifted_sine",
            make_user_connective(
                "shifted_sine", 1, lambda a: 2.0 + math.sin(a[0])),
            expect_rellip=False,
            expect_asympoly=None,
            note="ordinary Lipschitz, but far-out straddle pairs with tiny "
                 "relative distance still move the value by a constant",
        ),
        Fixture(
            "log1p",
            make_user_connective("log1p", 1, lambda a: math.log1p(a[0])),
            expect_rellip=True,
            expect_asympoly=False,
            note="grows slower than every power, so no power-law leading "
                 "order exists",
        ),
        Fixture(
            "sine_of_log",
            make_user_connective(
                "sine_of_log", 1,
                lambda a: 2.0 + math.sin(math.log(2.0 + a[0]))),
            expect_rellip=True,
            expect_asympoly=False,
            note="bounded and oscillating at logarithmic speed: the mean "
                 "stays bounded but never converges",
        ),
        Fixture(
            "sigmoid",
            sigmoid(),
            expect_rellip=True,
            expect_asympoly=True,
            note="smooth, bounded, with limit 1 on growing inputs",
        ),
    )
