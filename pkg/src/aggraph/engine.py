"""Leading-order prediction engines for closed terms.

Both engines walk the AST once per (scope, type) pair and combine child
values in Asym arithmetic.  The dense engine works over equality-pattern
types with exact extension percentages; the sparse engine works over
closure types driven by a rapid cap schedule, enumerating the admissible
one-new-root extension types at every aggregation.  Each returns the
prediction together with the full per-node table tree, so every number in
the output can be traced to the entry that produced it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .asymval import (
    ZERO,
    Asym,
    Pow,
    asym_max,
    asym_scale,
    asym_sum,
    asym_times_n,
    is_zero,
)
from .atypes import (
    EMPTY_TYPE,
    AtomicType,
    extension_percentages,
    in_extension,
    out_extensions,
)
from .closures import (
    ClosureType,
    ExtensionCaps,
    closure_extension_records,
    closure_type,
    compare_density,
    empty_closure_type,
    irrationality_guard,
    max_density,
    mu_asym,
    rapid_sequence,
)
from .connectives import Registry, asym_apply, default_registry
from .errors import CapacityError, ConnectiveClassError, InputError
from .graphs import (
    ExtensionPair,
    Graph,
    ISO_VERTEX_CAP,
    RootedGraph,
    count_automorphisms,
    count_rooted_automorphisms,
    extension_counts,
    induced_subgraph,
)
from .randgraphs import Dense, Regime, Sparse, edge_probability
from .terms import (
    MAX,
    MEAN,
    MIN,
    SUM,
    Agg,
    Apply,
    Const,
    Edge,
    Eq,
    LMean,
    Term,
    desugar_means,
    desugar_min,
    free_vars,
    metrics,
    validate,
)
from .closures import canonical_rooted

GUARD_PATTERN_SIZE = 12


@dataclass
class PhiTable:
    """Per-node prediction table.

    entries maps (scope, type key) to the Asym computed for that key; the
    children mirror the AST.  Structurally equal subterms share one
    entries dict.  meta carries engine bookkeeping; the root node's meta
    additionally records the schedule and the caps actually consumed.
    """

    term_node: Term
    regime: Regime
    entries: dict
    meta: dict
    children: tuple["PhiTable", ...] = ()

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(frozen=True)
class Analysis:
    asym: Asym
    table: PhiTable


def _check_connectives(t: Term) -> None:
    if isinstance(t, Apply):
        conn = t.conn
        if not (conn.is_rellip and conn.is_asympoly):
            raise ConnectiveClassError(
                f"connective {conn.name!r} is not certified for analysis"
            )
        for a in t.args:
            _check_connectives(a)
    elif isinstance(t, Agg):
        _check_connectives(t.body)
    elif isinstance(t, LMean):
        _check_connectives(t.body)


def _require_closed(t: Term) -> None:
    validate(t)
    fv = free_vars(t)
    if fv:
        raise InputError(f"analysis needs a closed term; free: {fv}")


def _mul(a: Asym, b: Asym) -> Asym:
    if is_zero(a) or is_zero(b):
        return ZERO
    return Pow(a.c * b.c, a.gamma + b.gamma)


def _k_bound(entry_stores) -> int:
    worst = 0.0
    for store in entry_stores:
        for val in store.values():
            if not is_zero(val):
                worst = max(worst, abs(val.gamma))
    return 1 + math.ceil(worst)


def _build_tables(t: Term, regime: Regime, entries: dict, metas: dict) -> PhiTable:
    if isinstance(t, Apply):
        kids = tuple(_build_tables(a, regime, entries, metas) for a in t.args)
    elif isinstance(t, (Agg, LMean)):
        kids = (_build_tables(t.body, regime, entries, metas),)
    else:
        kids = ()
    return PhiTable(
        t, regime, entries.setdefault(t, {}), metas.setdefault(t, {}), kids
    )


# ---------------------------------------------------------------------------
# Dense engine.


def analyze_dense(t: Term, p: float, *, registry: Registry | None = None) -> Analysis:
    """Leading order of the expectation of a closed term at constant p.

    Per equality-pattern type: atoms read the class graph, connective
    applications combine child values through their certified rules, a sum
    splits into n times the percentage-weighted fresh-vertex types plus
    the in-tuple classes, and a max takes the best achievable type.
    """
    if not (0.0 < p < 1.0):
        raise InputError(f"dense analysis needs 0 < p < 1, got {p}")
    reg = registry if registry is not None else default_registry()
    _require_closed(t)
    t = desugar_means(desugar_min(t, reg), reg)
    _check_connectives(t)
    regime = Dense(p)

    entries: dict[Term, dict] = {}
    metas: dict[Term, dict] = {}
    pct_cache: dict[AtomicType, dict[AtomicType, float]] = {}

    def percentages(t0: AtomicType) -> dict[AtomicType, float]:
        if t0 not in pct_cache:
            pct_cache[t0] = {
                ty: float(w) for ty, w in extension_percentages(t0, p).items()
            }
        return pct_cache[t0]

    def phi(node: Term, scope: tuple[str, ...], t0: AtomicType) -> Asym:
        store = entries.setdefault(node, {})
        key = (scope, t0)
        if key in store:
            return store[key]
        val = compute(node, scope, t0)
        store[key] = val
        return val

    def compute(node: Term, scope: tuple[str, ...], t0: AtomicType) -> Asym:
        if isinstance(node, Const):
            return Pow(node.value, 0.0) if node.value > 0 else ZERO
        if isinstance(node, Edge):
            a = t0.position_class(scope.index(node.x))
            b = t0.position_class(scope.index(node.y))
            if a == b:
                return ZERO
            return Pow(1.0, 0.0) if t0.class_graph.has_edge(a, b) else ZERO
        if isinstance(node, Eq):
            a = t0.position_class(scope.index(node.x))
            b = t0.position_class(scope.index(node.y))
            return Pow(1.0, 0.0) if a == b else ZERO
        if isinstance(node, Apply):
            return asym_apply(node.conn, [phi(a, scope, t0) for a in node.args])
        if isinstance(node, Agg):
            if node.kind not in (SUM, MAX):
                raise InputError(
                    f"{node.kind} nodes must be desugared before dense analysis"
                )
            inner = scope + (node.var,)
            pct = percentages(t0)
            out_vals = [
                (phi(node.body, inner, ty), pct[ty])
                for ty, _joined in out_extensions(t0)
            ]
            in_vals = [
                phi(node.body, inner, in_extension(t0, c))
                for c in range(t0.class_count)
            ]
            if node.kind == SUM:
                fresh = asym_times_n(
                    asym_sum([asym_scale(v, w) for v, w in out_vals])
                )
                return asym_sum([fresh] + in_vals)
            return asym_max([v for v, _ in out_vals] + in_vals)
        raise InputError(f"node {node!r} is not supported by the dense engine")

    result = phi(t, (), EMPTY_TYPE)
    root = _build_tables(t, regime, entries, metas)
    root.meta.update({
        "p": p,
        "k_bound": _k_bound(entries.values()),
    })
    return Analysis(result, root)


# ---------------------------------------------------------------------------
# Sparse engine.


def analyze_sparse(t: Term, alpha: float, D: int, W: int,
                   ell_config: Callable[[int, int], int] | None = None,
                   caps: ExtensionCaps | None = None, *,
                   registry: Registry | None = None,
                   native_means: bool = False) -> Analysis:
    """Leading order of a closed term at p = n**-alpha.

    Works over closure types at the levels of a rapid cap schedule: a term
    of depth d starts at schedule index D-d so its innermost binder lands
    exactly at level 0.  Sums split into the in-tuple classes, the other
    closure vertices, and the fresh extension types weighted by their
    expected counts; maxima range over the same entries restricted to
    types that actually occur.  With native_means, Mean/LMean nodes are
    evaluated at their typical-vertex types instead of being desugared.
    """
    regime = Sparse(alpha)
    if D < 1 or W < 1:
        raise InputError("sparse analysis needs D >= 1 and W >= 1")
    reg = registry if registry is not None else default_registry()
    _require_closed(t)
    t = desugar_min(t, reg)
    if not native_means:
        t = desugar_means(t, reg)
    _check_connectives(t)
    m = metrics(t)
    if m.depth > D:
        raise InputError(f"term depth {m.depth} exceeds D={D}")
    if m.width > W:
        raise InputError(f"term width {m.width} exceeds W={W}")
    # Advisory only: a conflict at some far-away pattern size does not
    # stop the analysis, because every density comparison that actually
    # runs re-checks its own margin and raises if ambiguous.
    guard = irrationality_guard(alpha, GUARD_PATTERN_SIZE)
    schedule = rapid_sequence(D, W, ell_config).s
    start = D - m.depth
    if caps is None:
        caps = ExtensionCaps()

    entries: dict[Term, dict] = {}
    metas: dict[Term, dict] = {}
    rec_cache: dict[tuple[ClosureType, int], list] = {}
    sub_cache: dict[tuple[ClosureType, int], ClosureType] = {}
    stats = {"extras": 0, "edges": 0, "types": 0, "enumerations": 0}

    def records_for(ct: ClosureType, s_next: int):
        key = (ct, s_next)
        if key not in rec_cache:
            stats["enumerations"] += 1
            recs = closure_extension_records(ct, s_next, alpha, caps=caps)
            stats["types"] += len(recs)
            for r in recs:
                stats["extras"] = max(stats["extras"], r.fresh_vertices - 1)
                stats["edges"] = max(stats["edges"], r.fresh_edges)
            rec_cache[key] = recs
        return rec_cache[key]

    def reclose(ct: ClosureType, s_next: int) -> ClosureType:
        # the same root set, seen at the child level
        key = (ct, s_next)
        if key not in sub_cache:
            if ct.arity == 0:
                sub_cache[key] = empty_closure_type(s_next, alpha)
            else:
                sub_cache[key] = closure_type(
                    ct.graph, tuple(range(ct.arity)), s_next, alpha
                )
        return sub_cache[key]

    def phi(node: Term, scope: tuple[str, ...], pattern: tuple[int, ...],
            ct: ClosureType, level: int) -> Asym:
        store = entries.setdefault(node, {})
        key = (scope, pattern, ct)
        if key in store:
            return store[key]
        val = compute(node, scope, pattern, ct, level)
        store[key] = val
        meta = metas.setdefault(node, {})
        meta["s_indices"] = tuple(sorted(set(meta.get("s_indices", ())) | {level}))
        return val

    def compute(node: Term, scope: tuple[str, ...], pattern: tuple[int, ...],
                ct: ClosureType, level: int) -> Asym:
        if isinstance(node, Const):
            return Pow(node.value, 0.0) if node.value > 0 else ZERO
        if isinstance(node, Edge):
            a = pattern[scope.index(node.x)]
            b = pattern[scope.index(node.y)]
            if a == b:
                return ZERO
            return Pow(1.0, 0.0) if ct.graph.has_edge(a, b) else ZERO
        if isinstance(node, Eq):
            a = pattern[scope.index(node.x)]
            b = pattern[scope.index(node.y)]
            return Pow(1.0, 0.0) if a == b else ZERO
        if isinstance(node, Apply):
            return asym_apply(
                node.conn, [phi(a, scope, pattern, ct, level) for a in node.args]
            )
        if isinstance(node, LMean):
            if not native_means:
                raise InputError("lmean must be desugared outside native mode")
            return _native_local(node, scope, pattern, ct, level)
        if isinstance(node, Agg):
            if node.kind == MIN:
                raise InputError("min must be desugared before sparse analysis")
            if node.kind == MEAN:
                if not native_means:
                    raise InputError("mean must be desugared outside native mode")
                return _native_mean(node, scope, pattern, ct, level)
            return _aggregate(node, scope, pattern, ct, level)
        raise InputError(f"node {node!r} is not supported by the sparse engine")

    def _child_groups(node, scope, pattern, ct, level):
        k_cls = ct.arity
        s_next = schedule[level + 1]
        inner = scope + (node.var,)
        base_child = reclose(ct, s_next)
        in_vals = [
            phi(node.body, inner, pattern + (c,), base_child, level + 1)
            for c in range(k_cls)
        ]
        hull_vals = []
        for v in range(k_cls, ct.graph.n):
            ct_v = closure_type(
                ct.graph, tuple(range(k_cls)) + (v,), s_next, alpha
            )
            hull_vals.append(
                phi(node.body, inner, pattern + (k_cls,), ct_v, level + 1)
            )
        recs = records_for(ct, s_next)
        fresh = [
            (phi(node.body, inner, pattern + (k_cls,), r.ctype, level + 1), r)
            for r in recs
        ]
        return in_vals, hull_vals, fresh

    def _aggregate(node, scope, pattern, ct, level):
        in_vals, hull_vals, fresh = _child_groups(node, scope, pattern, ct, level)
        if node.kind == SUM:
            weighted = [_mul(v, r.weight_asym(alpha)) for v, r in fresh]
            return asym_sum(in_vals + hull_vals + weighted)
        # a fresh type contributes to a max only if its count does not vanish
        occurring = [
            v for v, r in fresh
            if compare_density(r.fresh_edges, r.fresh_vertices, alpha) < 0
        ]
        return asym_max(in_vals + hull_vals + occurring)

    def _tstar(node, scope, pattern, ct, level, attach):
        k_cls = ct.arity
        s_next = schedule[level + 1]
        base_child = reclose(ct, s_next)
        g2 = base_child.graph.with_vertex(attach)
        canon, _ = canonical_rooted(g2, tuple(range(k_cls)) + (g2.n - 1,))
        tstar = ClosureType(
            RootedGraph(canon, tuple(range(k_cls + 1))), s_next, float(alpha)
        )
        inner = scope + (node.var,)
        return phi(node.body, inner, pattern + (k_cls,), tstar, level + 1)

    def _native_mean(node, scope, pattern, ct, level):
        # the typical vertex is fresh and attaches to nothing
        return _tstar(node, scope, pattern, ct, level, [])

    def _native_local(node, scope, pattern, ct, level):
        # the typical neighbor attaches to the anchor alone
        anchor_cls = pattern[scope.index(node.anchor)]
        return _tstar(node, scope, pattern, ct, level, [anchor_cls])

    result = phi(t, (), (), empty_closure_type(schedule[start], alpha), start)
    root = _build_tables(t, regime, entries, metas)
    root.meta.update({
        "alpha": alpha,
        "D": D,
        "W": W,
        "guard": {
            "max_pattern_size": guard.max_pattern_size,
            "passed": guard.passed,
            "conflict": guard.conflict,
        },
        "schedule": schedule,
        "start_index": start,
        "native_means": native_means,
        "caps": {
            "extra_vertices": caps.extra_vertices,
            "new_edges": caps.new_edges,
            "max_types": caps.max_types,
            "search_nodes": caps.search_nodes,
        },
        "extras_consumed": stats["extras"],
        "edges_consumed": stats["edges"],
        "extension_types": stats["types"],
        "enumerations": stats["enumerations"],
        "k_bound": _k_bound(entries.values()),
    })
    return Analysis(result, root)


# ---------------------------------------------------------------------------
# Closed-form corollaries.


def expected_subgraph_count(H: Graph, regime: Regime, n: int) -> float:
    """Expected number of copies of H: (n)_v * p^e / aut(H), exactly."""
    if H.n == 0:
        raise InputError("the pattern graph must have at least one vertex")
    if H.n > ISO_VERTEX_CAP:
        raise CapacityError(f"pattern too large: {H.n} > {ISO_VERTEX_CAP}")
    if n < 1:
        raise InputError(f"need n >= 1, got {n}")
    p = edge_probability(regime, n)
    return math.perm(n, H.n) * p ** H.edge_count / count_automorphisms(H)


def expected_subgraph_asym(H: Graph, regime: Regime) -> Asym:
    """Leading order of the copy count; sparse patterns must be admissible."""
    if H.n == 0:
        raise InputError("the pattern graph must have at least one vertex")
    if H.n > ISO_VERTEX_CAP:
        raise CapacityError(f"pattern too large: {H.n} > {ISO_VERTEX_CAP}")
    aut = count_automorphisms(H)
    if isinstance(regime, Dense):
        return Pow(regime.p ** H.edge_count / aut, float(H.n))
    rho, witness = max_density(H)
    if rho > 0 and compare_density(rho.numerator, rho.denominator,
                                   regime.alpha) >= 0:
        raise InputError(
            f"subgraph on {sorted(witness)} has density {rho}; such patterns "
            f"vanish at alpha={regime.alpha}"
        )
    return Pow(1.0 / aut, H.n - regime.alpha * H.edge_count)


def expected_max_extension_asym(H: Graph, R, regime: Regime) -> Asym:
    """Leading order of the maximum extension count over root tuples.

    R lists the root vertices of H; the pattern must have no edges among
    them, and in the sparse regime the rooted pair must be sparse.
    """
    roots = tuple(int(r) for r in R)
    if len(set(roots)) != len(roots):
        raise InputError("root vertices must be distinct")
    for r in roots:
        if not (0 <= r < H.n):
            raise InputError(f"root {r} out of range")
    if not roots or len(roots) >= H.n:
        raise InputError("need at least one root and one non-root vertex")
    for a in roots:
        for b in roots:
            if a < b and H.has_edge(a, b):
                raise InputError("the pattern must have no edges among the roots")
    bv = tuple(sorted(roots))
    base, _ = induced_subgraph(H, bv)
    pair = ExtensionPair(base, H, bv)
    if isinstance(regime, Dense):
        v, e = extension_counts(pair)
        aut = count_rooted_automorphisms(pair)
        return Pow(regime.p ** e / aut, float(v))
    return mu_asym(pair, regime.alpha)
