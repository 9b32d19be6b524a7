"""Monte-Carlo experiments against the analyzer's predictions.

Three entry points, all returning a :class:`Report`:

* :func:`run_concentration_experiment` samples a term over a ladder of
  graph sizes and compares the empirical trend with a predicted leading
  order, when one is supplied.
* :func:`verify_stabilization` checks that one-vertex extension counts
  of a fixed tuple type track their limiting shares on dense graphs.
* :func:`verify_extension_concentration` checks that rooted extension
  counts of a sparse pattern concentrate around their expectation, with
  a fitted polynomial decay rate for the worst relative deviation.

Reports keep every raw sampled value, so any verdict can be recomputed
from the report alone.  Emitted JSON deliberately omits wall-clock time:
two runs with the same config must produce byte-identical files.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .asymval import Asym, Pow, is_zero
from .atypes import AtomicType, atomic_type, extension_percentages, out_extensions
from .closures import PairClass, classify_pair, count_extensions, mu_all
from .errors import BudgetError, InputError
from .evaluate import Environment, eval_term
from .graphs import ExtensionPair
from .randgraphs import Dense, Regime, Sparse, edge_probability, sample
from .terms import Term, free_vars, metrics, print_term, validate

WITHIN_BAND_TARGET = 0.95
SLOPE_GAP_TARGET = 0.05
DEFAULT_BUDGET = 20_000_000_000_000
SMALL_MEAN_FLOOR = 10.0
DEV_FLOOR = 1e-12


@dataclass(frozen=True)
class ExperimentConfig:
    """What to run: a closed term, a regime, and a sampling plan.

    `prediction` is the expected leading order (or None to just collect
    statistics).  `budget` bounds the a-priori evaluation cost estimate
    sum(n**depth) * replicates; the run refuses to start above it.
    """

    term: Term
    regime: Regime
    n_ladder: tuple[int, ...]
    replicates: int
    seed: int
    prediction: Asym | None = None
    dense_lambda: float = 3.0
    sparse_epsilon: float = 0.1
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        ladder = tuple(int(n) for n in self.n_ladder)
        object.__setattr__(self, "n_ladder", ladder)
        if not ladder:
            raise InputError("n_ladder must not be empty")
        if ladder[0] < 1:
            raise InputError("graph sizes must be positive")
        if any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise InputError(f"n_ladder must be strictly increasing: {ladder}")
        if self.replicates < 2:
            raise InputError("at least 2 replicates are needed for spread")
        if self.dense_lambda <= 0:
            raise InputError("dense_lambda must be positive")
        if self.sparse_epsilon <= 0:
            raise InputError("sparse_epsilon must be positive")
        if self.budget < 1:
            raise InputError("budget must be positive")

    def band(self, n: int) -> float:
        """Relative half-width of the acceptance band at size n."""
        if isinstance(self.regime, Dense):
            return self.dense_lambda * math.log(n) / math.sqrt(n)
        return float(n) ** (-self.sparse_epsilon)


@dataclass
class Report:
    """Everything an experiment produced, raw values included."""

    provenance: dict
    per_n: list[dict]
    prediction_check: dict | None = None
    verdicts: dict[str, dict] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)
    runtime: dict = field(default_factory=dict)


def _substream(ladder_index: int, replicates: int, r: int) -> int:
    # One Philox substream per (size, replicate); same r at two sizes
    # must not share a key.
    return ladder_index * replicates + r


def _summary(values: Sequence[float], band: float) -> dict:
    r = len(values)
    mean = math.fsum(values) / r
    if r > 1:
        var = math.fsum((v - mean) ** 2 for v in values) / (r - 1)
    else:
        var = 0.0
    if mean > 0.0:
        inside = sum(1 for v in values if abs(v / mean - 1.0) <= band)
    else:
        inside = sum(1 for v in values if v == 0.0)
    return {
        "mean": mean,
        "sd": math.sqrt(var),
        "min": min(values),
        "max": max(values),
        "zero_fraction": sum(1 for v in values if v == 0.0) / r,
        "band": band,
        "fraction_within_band": inside / r,
    }


def _fit_log_slope(ns: Sequence[int], ys: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope and intercept of log y against log n."""
    lx = np.log(np.asarray(ns, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), float(intercept)


def run_concentration_experiment(cfg: ExperimentConfig) -> Report:
    """Sample cfg.term on random graphs over the ladder and summarize.

    Raises BudgetError before any sampling if the cost estimate
    sum(n**depth) * replicates exceeds cfg.budget.  With a power-law
    prediction the report carries a log-log fit of the empirical means;
    with a zero prediction it checks that values actually vanish.
    """
    validate(cfg.term)
    if free_vars(cfg.term):
        raise InputError(
            f"experiment terms must be closed, got free {list(free_vars(cfg.term))}"
        )
    depth = max(metrics(cfg.term).depth, 1)
    estimate = sum(n**depth for n in cfg.n_ladder) * cfg.replicates
    if estimate > cfg.budget:
        raise BudgetError(
            f"evaluation estimate {estimate} exceeds budget {cfg.budget} "
            f"(depth {depth}, ladder {cfg.n_ladder})"
        )

    started = time.perf_counter()
    per_n: list[dict] = []
    evaluations = 0
    for i, n in enumerate(cfg.n_ladder):
        values: list[float] = []
        for r in range(cfg.replicates):
            g = sample(n, cfg.regime, cfg.seed,
                       replicate=_substream(i, cfg.replicates, r))
            values.append(eval_term(cfg.term, Environment(g), cache=True))
            evaluations += 1
        row = {"n": n, "values": values}
        row.update(_summary(values, cfg.band(n)))
        per_n.append(row)

    report = Report(
        provenance={
            "term": print_term(cfg.term),
            "regime": _regime_dict(cfg.regime),
            "n_ladder": list(cfg.n_ladder),
            "replicates": cfg.replicates,
            "seed": cfg.seed,
            "substreams": "replicate key = ladder_index * replicates + r",
            "budget": cfg.budget,
            "cost_estimate": estimate,
        },
        per_n=per_n,
    )

    worst = min(row["fraction_within_band"] for row in per_n)
    report.verdicts["within_band"] = {
        "passed": worst >= WITHIN_BAND_TARGET,
        "threshold": WITHIN_BAND_TARGET,
        "observed": worst,
    }

    pred = cfg.prediction
    if pred is None:
        report.notes.append(
            "no leading-order prediction available; only band statistics reported"
        )
    elif is_zero(pred):
        top = per_n[-1]
        threshold = 1.0 - 1.0 / cfg.replicates
        report.prediction_check = {
            "kind": "zero",
            "zero_fraction_top": top["zero_fraction"],
            "threshold": threshold,
        }
        report.verdicts["zero_values"] = {
            "passed": top["zero_fraction"] >= threshold,
            "threshold": threshold,
            "observed": top["zero_fraction"],
        }
    else:
        assert isinstance(pred, Pow)
        pts = [(row["n"], row["mean"]) for row in per_n if row["mean"] > 0.0]
        check: dict = {"kind": "power", "gamma": pred.gamma, "c": pred.c}
        if len(pts) >= 2:
            slope, intercept = _fit_log_slope([n for n, _ in pts],
                                              [m for _, m in pts])
            check.update({
                "fitted_gamma": slope,
                "fitted_c": math.exp(intercept),
                "slope_gap": abs(slope - pred.gamma),
            })
            report.verdicts["slope"] = {
                "passed": check["slope_gap"] <= SLOPE_GAP_TARGET,
                "threshold": SLOPE_GAP_TARGET,
                "observed": check["slope_gap"],
            }
        else:
            check["degenerate"] = True
            report.notes.append(
                "fewer than two ladder sizes with positive mean; no slope fit"
            )
        report.prediction_check = check

    report.runtime = {
        "seconds": time.perf_counter() - started,
        "evaluations": evaluations,
    }
    return report


def verify_stabilization(t0: AtomicType, n: int, p: float, replicates: int,
                         seed: int, *, tuple_sample: int = 50) -> Report:
    """Check one-vertex extension counts of tuples of type t0 on G(n, p).

    For each sampled tuple and each extension type t, the number of
    outside vertices realizing t should be within
    share(t) * (n +- sqrt(n) * ln(n)**0.9) of its limiting share.
    Replicates with no tuple of the requested type are recorded, not
    fatal.
    """
    if n < 1:
        raise InputError("n must be positive")
    if replicates < 1:
        raise InputError("need at least one replicate")
    started = time.perf_counter()
    shares = extension_percentages(t0, p)
    by_subset = {joined: ext for ext, joined in out_extensions(t0)}
    k = len(t0.equality_pattern)
    slack = math.sqrt(n) * math.log(n) ** 0.9

    per_type: dict[AtomicType, dict] = {
        ext: {"trials": 0, "within": 0} for ext in shares
    }
    empty_replicates = 0
    tuples_seen = 0
    for rep in range(replicates):
        g = sample(n, Dense(p), seed, replicate=rep)
        found = 0
        for u in _all_tuples(n, k):
            if atomic_type(g, u) != t0:
                continue
            found += 1
            reps_of = _class_representatives(t0, u)
            counts: dict[frozenset[int], int] = {s: 0 for s in by_subset}
            used = set(u)
            for v in range(n):
                if v in used:
                    continue
                joined = frozenset(
                    c for c, w in enumerate(reps_of) if g.has_edge(v, w)
                )
                counts[joined] += 1
            for joined, ext in by_subset.items():
                share = float(shares[ext])
                cell = per_type[ext]
                cell["trials"] += 1
                if abs(counts[joined] - share * n) <= share * slack:
                    cell["within"] += 1
            if found >= tuple_sample:
                break
        tuples_seen += found
        if found == 0:
            empty_replicates += 1

    trials = sum(c["trials"] for c in per_type.values())
    within = sum(c["within"] for c in per_type.values())
    observed = within / trials if trials else 0.0

    report = Report(
        provenance={
            "type": repr(t0),
            "n": n,
            "p": p,
            "replicates": replicates,
            "seed": seed,
            "tuple_sample": tuple_sample,
        },
        per_n=[{
            "n": n,
            "tuples": tuples_seen,
            "trials": trials,
            "within": within,
            "fraction_within_band": observed,
        }],
        details={"per_type": {
            _subset_label(joined): {
                "share": float(shares[ext]),
                "trials": per_type[ext]["trials"],
                "within": per_type[ext]["within"],
            }
            for joined, ext in sorted(by_subset.items(),
                                      key=lambda kv: sorted(kv[0]))
        }},
    )
    report.verdicts["stabilization"] = {
        "passed": trials > 0 and observed >= WITHIN_BAND_TARGET,
        "threshold": WITHIN_BAND_TARGET,
        "observed": observed,
    }
    if empty_replicates:
        report.notes.append(
            f"{empty_replicates} of {replicates} replicates had no tuple "
            f"of the requested type"
        )
    report.runtime = {
        "seconds": time.perf_counter() - started,
        "evaluations": replicates,
    }
    return report


def verify_extension_concentration(pair: ExtensionPair, alpha: float,
                                   n_ladder: Sequence[int], replicates: int,
                                   seed: int, *,
                                   tuple_sample: int = 20) -> Report:
    """Check that rooted extension counts track mu over a sparse ladder.

    The pattern must be sparse at alpha.  The fitted decay rate of the
    worst relative deviation must come out positive for the verdict to
    pass; a small expected count at the ladder top is flagged because
    ratios are then noisy no matter what.
    """
    if classify_pair(pair, alpha) is not PairClass.SPARSE:
        raise InputError(
            f"extension concentration needs a sparse pattern at alpha={alpha}"
        )
    ladder = tuple(int(n) for n in n_ladder)
    if len(ladder) < 2:
        raise InputError("need at least two ladder sizes to fit a decay rate")
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise InputError(f"n_ladder must be strictly increasing: {ladder}")
    if replicates < 1:
        raise InputError("need at least one replicate")
    if ladder[0] <= pair.base.n:
        raise InputError("ladder sizes must exceed the number of roots")

    started = time.perf_counter()
    k = pair.base.n
    per_n: list[dict] = []
    evaluations = 0
    for i, n in enumerate(ladder):
        p = edge_probability(Sparse(alpha), n)
        expected = mu_all(pair, n, p)
        worst = 0.0
        ratios: list[float] = []
        for r in range(replicates):
            g = sample(n, Sparse(alpha), seed,
                       replicate=_substream(i, replicates, r))
            taken = 0
            for u in _lex_tuples(n, k):
                count = count_extensions(g, u, pair)
                ratio = count / expected
                ratios.append(ratio)
                worst = max(worst, abs(ratio - 1.0))
                taken += 1
                if taken >= tuple_sample:
                    break
            evaluations += taken
        per_n.append({
            "n": n,
            "expected": expected,
            "mean_ratio": math.fsum(ratios) / len(ratios),
            "max_deviation": worst,
            "samples": len(ratios),
        })

    slope, _ = _fit_log_slope(
        [row["n"] for row in per_n],
        [max(row["max_deviation"], DEV_FLOOR) for row in per_n],
    )
    epsilon = -slope

    report = Report(
        provenance={
            "pattern": {
                "base_vertices": list(pair.base_vertices),
                "new_vertices": pair.new_vertex_count,
                "new_edges": pair.new_edge_count,
            },
            "alpha": alpha,
            "n_ladder": list(ladder),
            "replicates": replicates,
            "seed": seed,
            "tuple_sample": tuple_sample,
        },
        per_n=per_n,
        prediction_check={"kind": "decay", "fitted_epsilon": epsilon},
    )
    report.verdicts["decay"] = {
        "passed": epsilon > 0.0,
        "threshold": 0.0,
        "observed": epsilon,
    }
    if per_n[-1]["expected"] < SMALL_MEAN_FLOOR:
        report.notes.append(
            f"expected extension count {per_n[-1]['expected']:.3g} at the "
            f"ladder top is below {SMALL_MEAN_FLOOR:g}; relative deviations "
            f"are noisy in this range"
        )
    report.runtime = {
        "seconds": time.perf_counter() - started,
        "evaluations": evaluations,
    }
    return report


def report_to_dict(report: Report) -> dict:
    """JSON-ready view of a report.

    Wall-clock time is dropped so identical configs emit identical
    bytes; the deterministic evaluation count stays.
    """
    from . import __version__

    return {
        "schema_version": __version__,
        "provenance": report.provenance,
        "per_n": report.per_n,
        "prediction_check": report.prediction_check,
        "verdicts": report.verdicts,
        "notes": report.notes,
        "details": report.details,
        "runtime": {"evaluations": report.runtime.get("evaluations", 0)},
    }


def emit_report(report: Report, path: str | Path, fmt: str = "json") -> None:
    """Write a report to disk as json or csv (one row per ladder size)."""
    target = Path(path)
    try:
        if fmt == "json":
            text = json.dumps(report_to_dict(report), sort_keys=True,
                              indent=2, default=_json_default)
            target.write_text(text + "\n")
        elif fmt == "csv":
            _emit_csv(report, target)
        else:
            raise InputError(f"unknown report format {fmt!r}")
    except OSError as exc:
        raise InputError(f"cannot write report to {target}: {exc}") from exc


def _emit_csv(report: Report, target: Path) -> None:
    columns: list[str] = []
    for row in report.per_n:
        for key, value in row.items():
            if key not in columns and not isinstance(value, (list, tuple, dict)):
                columns.append(key)
    with target.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in report.per_n:
            writer.writerow([row.get(c, "") for c in columns])


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON-serializable: {obj!r}")


def _regime_dict(regime: Regime) -> dict:
    if isinstance(regime, Dense):
        return {"kind": "dense", "p": regime.p}
    return {"kind": "sparse", "alpha": regime.alpha}


def _lex_tuples(n: int, k: int):
    """Distinct-entry tuples in lexicographic order."""
    if k == 0:
        yield ()
        return
    yield from itertools.permutations(range(n), k)


def _all_tuples(n: int, k: int):
    """All tuples, repeats allowed; types can have coincident positions."""
    yield from itertools.product(range(n), repeat=k)


def _subset_label(s: frozenset[int]) -> str:
    return "{" + ",".join(str(c) for c in sorted(s)) + "}"


def _class_representatives(t0: AtomicType, u: Sequence[int]) -> list[int]:
    reps: list[int] = [-1] * t0.class_count
    for pos, cls in enumerate(t0.equality_pattern):
        if reps[cls] < 0:
            reps[cls] = u[pos]
    return reps
