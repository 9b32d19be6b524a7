"""Closure types of vertex tuples, sparse regime.

Everything here revolves around one comparison: does a pattern with e new
edges and v new vertices have e > v/alpha?  Since alpha is (numerically)
irrational, each comparison is decided with a fixed relative margin and an
ambiguous one raises instead of guessing; run `irrationality_guard` first
to know the margin can never trip.

The main objects are dense/sparse pair classification, the s-closure of a
tuple (grow by small dense attachments until none is left), closure types
(the closure as a canonically labeled rooted graph), the enumeration of
one-new-root closure extensions with their expectation weights, strictly
balanced chains, and the rapid cap schedules the term engine consumes.
Brute-force searches are capped and raise rather than truncate.
"""

from __future__ import annotations

import enum
import itertools
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .asymval import Asym, Pow
from .errors import CapacityError, InputError, IrrationalityError
from .graphs import (
    ExtensionPair,
    Graph,
    RootedGraph,
    _iso_backtrack,
    _search_order,
    count_fixing_automorphisms,
    count_rooted_automorphisms,
    extension_counts,
    induced_subgraph,
    max_density,
)

GUARD_TOL = 1e-9
CLASSIFY_VERTEX_CAP = 12
ELL_BASE = 4
# ell(k, s) is astronomically large long before this; refuse earlier so the
# power never allocates gigabytes of bignum.
MAX_ELL_EXPONENT = 4096


def compare_density(e: int, v: int, alpha: float, tol: float = GUARD_TOL) -> int:
    """Sign of e*alpha - v, the universal density comparison.

    Raises when the difference falls inside the guard margin tol*e, because
    then no side can be certified against float error.
    """
    if e < 0 or v < 0:
        raise InputError(f"edge/vertex counts must be >= 0, got e={e}, v={v}")
    margin = tol * max(e, 1)
    diff = e * alpha - v
    if diff > margin:
        return 1
    if diff < -margin:
        return -1
    raise IrrationalityError(alpha, e, v, margin)


def max_sparse_attach(alpha: float, tol: float = GUARD_TOL) -> int:
    """Largest edge count a single sparse new vertex may carry: e*alpha < 1."""
    if not (0.0 < alpha < 1.0):
        raise InputError(f"alpha must be in (0,1), got {alpha}")
    e = 1
    while compare_density(e + 1, 1, alpha, tol) < 0:
        e += 1
    return e


@dataclass(frozen=True)
class GuardReport:
    alpha: float
    max_pattern_size: int
    tol: float
    passed: bool
    conflict: tuple[int, int] | None


def irrationality_guard(alpha: float, max_pattern_size: int,
                        tol: float = GUARD_TOL) -> GuardReport:
    """Certify every density comparison up to the pattern caps is decisive.

    Scans all (e, v) with v a vertex count up to the cap and e an edge
    count a pattern of that size could have; the first pair with
    |e*alpha - v| <= tol*e is reported as the conflict.
    """
    if not (0.0 < alpha < 1.0):
        raise InputError(f"alpha must be in (0,1), got {alpha}")
    if max_pattern_size < 1:
        raise InputError("max_pattern_size must be >= 1")
    max_e = max_pattern_size * (max_pattern_size - 1) // 2
    for e in range(1, max(max_e, 1) + 1):
        for v in range(1, max_pattern_size + 1):
            if abs(e * alpha - v) <= tol * e:
                return GuardReport(alpha, max_pattern_size, tol, False, (e, v))
    return GuardReport(alpha, max_pattern_size, tol, True, None)


# ---------------------------------------------------------------------------
# Pair classification.


class PairClass(enum.Enum):
    DENSE = "dense"
    SPARSE = "sparse"
    NEITHER = "neither"


def _bit_masks(g: Graph) -> list[int]:
    masks = [0] * g.n
    for a, b in g.edges():
        masks[a] |= 1 << b
        masks[b] |= 1 << a
    return masks


def _edges_inside(masks: Sequence[int], subset: int) -> int:
    total = 0
    rest = subset
    while rest:
        v = (rest & -rest).bit_length() - 1
        rest &= rest - 1
        total += (masks[v] & subset).bit_count()
    return total // 2


def classify_pair(pair: ExtensionPair, alpha: float, *,
                  cap: int = CLASSIFY_VERTEX_CAP) -> PairClass:
    """Dense, sparse, or neither, by exhaustive subset checks.

    Dense: every proper superset S of the base misses edges faster than
    vertices (e(S) > v(S)/alpha, counted toward the full top graph).
    Sparse: every way of taking new vertices stays strictly under the
    budget (new edges < new vertices / alpha, counted inside the subset).
    """
    if pair.top.n > cap:
        raise CapacityError(
            f"classification is exhaustive; refusing |V|={pair.top.n} > {cap}"
        )
    if pair.new_vertex_count < 1:
        raise InputError("classification needs at least one new vertex")
    masks = _bit_masks(pair.top)
    base_mask = 0
    for x in pair.base_vertices:
        base_mask |= 1 << x
    new = pair.new_vertices()
    total_edges = pair.top.edge_count
    top_n = pair.top.n

    # Decisive verdicts on few-vertex subsets come first, so a rational
    # alpha sitting exactly on a large pattern's density is preempted by a
    # clear violation whenever one exists.
    full_bits = (1 << len(new)) - 1
    dense = True
    for bits in sorted(range(full_bits), key=lambda b: (b.bit_count(), b),
                       reverse=True):  # S strictly below the top graph
        s_mask = base_mask
        for i, w in enumerate(new):
            if bits >> i & 1:
                s_mask |= 1 << w
        e = total_edges - _edges_inside(masks, s_mask)
        v = top_n - s_mask.bit_count()
        if compare_density(e, v, alpha) < 0:
            dense = False
            break
    if dense:
        return PairClass.DENSE

    base_edges = pair.base.edge_count
    for bits in sorted(range(1, full_bits + 1),
                       key=lambda b: (b.bit_count(), b)):
        s_mask = base_mask
        taken = 0
        for i, w in enumerate(new):
            if bits >> i & 1:
                s_mask |= 1 << w
                taken += 1
        e = _edges_inside(masks, s_mask) - base_edges
        if compare_density(e, taken, alpha) > 0:
            return PairClass.NEITHER
    return PairClass.SPARSE


# ---------------------------------------------------------------------------
# Canonical rooted labeling.


def _twin_rows(g: Graph, v: int, w: int) -> bool:
    return (g.neighbors(v) - {w}) == (g.neighbors(w) - {v})


def canonical_rooted(g: Graph, roots: Sequence[int]) -> tuple[Graph, tuple[int, ...]]:
    """Relabel with root i at vertex i and the least adjacency string after.

    Non-root vertices take labels k..n-1 so that the concatenated rows
    (adjacency of each new vertex to all earlier labels) are lexicographic
    minimal; branch-and-bound over the tie choices.  Returns the relabeled
    graph and order with order[new_label] = old_vertex.
    """
    roots = tuple(int(r) for r in roots)
    if len(set(roots)) != len(roots):
        raise InputError("roots must be pairwise distinct")
    for r in roots:
        if not (0 <= r < g.n):
            raise InputError(f"root {r} out of range")
    n = g.n
    free = sorted(set(range(n)) - set(roots))
    order = list(roots)
    if not free:
        best_order = tuple(order)
    else:
        best: list = [None, None]  # [bit string, order]
        used = set(roots)
        acc: list[tuple[int, ...]] = []

        def dfs() -> None:
            if len(order) == n:
                key = tuple(acc)
                if best[0] is None or key < best[0]:
                    best[0] = key
                    best[1] = tuple(order)
                return
            rows = sorted(
                (tuple(1 if g.has_edge(v, w) else 0 for w in order), v)
                for v in free
                if v not in used
            )
            least = rows[0][0]
            level = len(acc)
            if best[0] is not None:
                prefix = tuple(acc) + (least,)
                if prefix > best[0][: level + 1]:
                    return
            acc.append(least)
            expanded: list[int] = []
            for row, v in rows:
                if row != least:
                    break
                if any(_twin_rows(g, v, w) for w in expanded):
                    continue
                expanded.append(v)
                order.append(v)
                used.add(v)
                dfs()
                order.pop()
                used.remove(v)
            acc.pop()

        dfs()
        best_order = best[1]
    inverse = {old: new for new, old in enumerate(best_order)}
    edges = [(inverse[a], inverse[b]) for a, b in g.edges()]
    return Graph(n, edges), best_order


# ---------------------------------------------------------------------------
# Closures.


def ell(k: int, s: int, base: int = ELL_BASE) -> int:
    """Default closure-size bound (k+s) * base**s; a stand-in schedule,
    coordinate-wise increasing, not derived from anything deeper."""
    if k < 0 or s < 0:
        raise InputError("ell arguments must be nonnegative")
    if base < 2:
        raise InputError("ell base must be >= 2")
    if s > MAX_ELL_EXPONENT:
        raise CapacityError(
            f"ell exponent {s} exceeds {MAX_ELL_EXPONENT}; the schedule has "
            f"exploded past any computable size"
        )
    return (k + s) * base ** s


@dataclass(frozen=True)
class RapidSequence:
    """A cap schedule s_0 >= s_1 >= ... >= s_D = 0 with s_{i-1} = ell(W, s_i)."""

    D: int
    W: int
    s: tuple[int, ...]

    def __post_init__(self):
        if self.D < 1 or self.W < 1:
            raise InputError("rapid sequence needs D >= 1 and W >= 1")
        if len(self.s) != self.D + 1:
            raise InputError("schedule length must be D+1")
        if self.s[-1] != 0:
            raise InputError("schedule must end at 0")
        for a, b in zip(self.s, self.s[1:]):
            if a < b:
                raise InputError("schedule must be non-increasing")


def rapid_sequence(D: int, W: int,
                   ell_config: Callable[[int, int], int] | None = None) -> RapidSequence:
    if D < 1 or W < 1:
        raise InputError("rapid sequence needs D >= 1 and W >= 1")
    fn = ell_config if ell_config is not None else ell
    sched = [0]
    for _ in range(D):
        sched.append(fn(W, sched[-1]))
    sched.reverse()
    return RapidSequence(D, W, tuple(sched))


@dataclass(frozen=True)
class Closure:
    """A closure as a vertex set plus its induced subgraph.

    order[i] is the original vertex that became vertex i of `graph`.
    """

    vertices: frozenset[int]
    graph: Graph
    order: tuple[int, ...]


def _distinct_entries(g: Graph, u: Sequence[int]) -> tuple[int, ...]:
    out: list[int] = []
    seen: set[int] = set()
    for v in u:
        v = int(v)
        if not (0 <= v < g.n):
            raise InputError(f"tuple entry {v} out of range for n={g.n}")
        if v not in seen:
            seen.add(v)
            out.append(v)
    return tuple(out)


def _is_dense_step(g: Graph, inside: set[int], added: Sequence[int],
                   alpha: float) -> bool:
    """Is (H, H+added) a dense extension inside g, for H on `inside`?"""
    added = sorted(added)
    m = len(added)
    deg_in = [sum(1 for w in g.neighbors(x) if w in inside) for x in added]
    intra = [
        [1 if g.has_edge(added[i], added[j]) else 0 for j in range(m)]
        for i in range(m)
    ]
    total = sum(deg_in) + sum(intra[i][j] for i in range(m) for j in range(i + 1, m))
    for bits in range((1 << m) - 1):  # subsets T of the added set, T != all
        e = total
        taken = 0
        for i in range(m):
            if bits >> i & 1:
                taken += 1
                e -= deg_in[i]
                e -= sum(intra[i][j] for j in range(m) if bits >> j & 1 and j > i)
        if compare_density(e, m - taken, alpha) < 0:
            return False
    return True


def _candidate_sets(g: Graph, inside: set[int], size: int) -> list[tuple[int, ...]]:
    """Vertex sets of the given size reachable by attaching to inside.

    Grown by adjacency (every prefix touches the current hull), which is
    what a minimal dense attachment looks like; free-floating dense
    clusters are deliberately out of scope here.
    """
    frontier = sorted(
        {w for v in inside for w in g.neighbors(v)} - inside
    )
    found: set[tuple[int, ...]] = set()

    def grow(current: list[int], pool: set[int]) -> None:
        if len(current) == size:
            found.add(tuple(sorted(current)))
            return
        for w in sorted(pool):
            current.append(w)
            nxt = (pool | g.neighbors(w)) - inside - set(current)
            grow(current, nxt)
            current.pop()

    for start in frontier:
        grow([start], (set(frontier) | g.neighbors(start)) - inside - {start})
    return sorted(found)


def _find_dense_step(g: Graph, inside: set[int], s: int,
                     alpha: float) -> tuple[int, ...] | None:
    limit = min(s, g.n - len(inside))
    for size in range(1, limit + 1):
        for cand in _candidate_sets(g, inside, size):
            if _is_dense_step(g, inside, cand, alpha):
                return cand
    return None


def closure(g: Graph, u: Sequence[int], s: int, alpha: float, *,
            cap: int | None = None) -> Closure:
    """The s-closure of the tuple: add minimal dense attachments of at most
    s vertices until none remains.  Smallest attachment first, ties by
    vertex order, so the search is deterministic; the fixpoint itself does
    not depend on those choices.
    """
    if s < 0:
        raise InputError(f"closure level must be >= 0, got {s}")
    distinct = _distinct_entries(g, u)
    if cap is None:
        cap = ell(len(distinct), s) if s <= 24 else g.n
    hull = set(distinct)
    if s > 0:
        while True:
            step = _find_dense_step(g, hull, s, alpha)
            if step is None:
                break
            if len(hull) + len(step) > cap:
                raise CapacityError(
                    f"closure of {distinct} exceeds the size cap {cap}; "
                    f"the sample is denser than the theory said to expect"
                )
            hull.update(step)
    sub, order = induced_subgraph(g, hull)
    return Closure(frozenset(hull), sub, order)


@dataclass(frozen=True)
class ClosureType:
    """Canonically labeled closure: roots are vertices 0..k-1, in order.

    Valid types have maximum density strictly below 1/alpha; anything
    denser is refused at construction, because such patterns are exactly
    the ones the sparse regime says never to expect.
    """

    closure_graph: RootedGraph
    s: int
    alpha_key: float

    def __post_init__(self):
        k = len(self.closure_graph.roots)
        if self.closure_graph.roots != tuple(range(k)):
            raise InputError("closure types must be canonically rooted at 0..k-1")
        if self.s < 0:
            raise InputError("closure level must be >= 0")
        g = self.closure_graph.graph
        if g.n:
            rho, witness = max_density(g)
            if rho > 0 and compare_density(rho.numerator, rho.denominator,
                                           self.alpha_key) >= 0:
                raise InputError(
                    f"subgraph on {sorted(witness)} has density {rho}, not "
                    f"below 1/alpha; outside the admissible type family"
                )

    @property
    def arity(self) -> int:
        return len(self.closure_graph.roots)

    @property
    def graph(self) -> Graph:
        return self.closure_graph.graph

    def sort_key(self) -> tuple:
        g = self.closure_graph.graph
        return (self.arity, g.n, g.edge_count, tuple(sorted(g.edges())))

    def __repr__(self) -> str:
        g = self.closure_graph.graph
        return (
            f"ClosureType(k={self.arity}, n={g.n}, "
            f"edges={sorted(g.edges())}, s={self.s})"
        )


def empty_closure_type(s: int, alpha: float) -> ClosureType:
    return ClosureType(RootedGraph(Graph(0), ()), s, float(alpha))


def closure_type(g: Graph, u: Sequence[int], s: int, alpha: float, *,
                 cap: int | None = None) -> ClosureType:
    """Closure of the tuple, canonicalized with the tuple as roots.

    Repeated entries collapse to their first occurrence; callers that need
    the repeat pattern keep it alongside (the closure only sees the set).
    """
    distinct = _distinct_entries(g, u)
    cl = closure(g, distinct, s, alpha, cap=cap)
    position = {orig: i for i, orig in enumerate(cl.order)}
    canon, _ = canonical_rooted(cl.graph, tuple(position[v] for v in distinct))
    return ClosureType(
        RootedGraph(canon, tuple(range(len(distinct)))), s, float(alpha)
    )


# ---------------------------------------------------------------------------
# One-new-root extension types.


@dataclass(frozen=True)
class ExtensionCaps:
    """Search caps for the extension-type enumeration.

    extra_vertices/new_edges bound the family being enumerated (and are
    also capped by the closure level); the search budget bounds the work,
    and overrunning it refuses the whole enumeration.
    """

    extra_vertices: int = 4
    new_edges: int = 8
    max_types: int = 512
    search_nodes: int = 200_000


@dataclass(frozen=True)
class ExtensionTypeRecord:
    """One extension type plus the bookkeeping its expectation weight needs.

    fresh_vertices/fresh_edges count what the type adds on top of the
    parent closure; aut counts automorphisms of the glued union fixing the
    parent side pointwise, and multiplicity is the number of positions the
    new root can occupy under those automorphisms.
    """

    ctype: ClosureType
    fresh_vertices: int
    fresh_edges: int
    aut: int
    multiplicity: int

    def weight_asym(self, alpha: float) -> Asym:
        return Pow(self.multiplicity / self.aut,
                   self.fresh_vertices - alpha * self.fresh_edges)


def _vertex_orbit_size(g: Graph, fixed: Sequence[int], vertex: int) -> int:
    """How many vertices an automorphism fixing `fixed` can send `vertex` to."""
    fixed = list(fixed)
    fixed_set = set(fixed)
    images = 0
    deg = g.degree(vertex)
    for target in range(g.n):
        if target in fixed_set and target != vertex:
            continue
        if g.degree(target) != deg:
            continue
        mapping = {f: f for f in fixed}
        ok = True
        for f in fixed:
            if g.has_edge(vertex, f) != g.has_edge(target, f):
                ok = False
                break
        if not ok:
            continue
        mapping[vertex] = target
        used = fixed_set | {target}
        order = _search_order(g, fixed + [vertex])
        if _iso_backtrack(g, g, mapping, used, order, 0, count_all=False):
            images += 1
    return images


def _fresh_part_sparse(fg: Graph, cn: int, alpha: float) -> bool:
    """Is every nonempty set of fresh vertices strictly under the budget?

    Equivalent to the sparse condition of the glued pair restricted to fg:
    edges from fresh vertices into the core or among themselves, per fresh
    vertex taken.  Violations are monotone under growth, so this prunes
    whole search branches.  Small subsets first, as in classify_pair.
    """
    fresh = list(range(cn, fg.n))
    masks = _bit_masks(fg)
    core_mask = (1 << cn) - 1
    for bits in sorted(range(1, 1 << len(fresh)),
                       key=lambda b: (b.bit_count(), b)):
        t_mask = 0
        for i, w in enumerate(fresh):
            if bits >> i & 1:
                t_mask |= 1 << w
        e = _edges_inside(masks, t_mask)
        rest = t_mask
        while rest:
            v = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            e += (masks[v] & core_mask).bit_count()
        if compare_density(e, bits.bit_count(), alpha) >= 0:
            return False
    return True


def _max_sparse_edges(v: int, alpha: float) -> int:
    """Largest edge count a sparse fresh part on v vertices can carry.

    Ascending guarded compares; an ambiguous boundary raises rather than
    silently shrinking the family.
    """
    e = 0
    while compare_density(e + 1, v, alpha) < 0:
        e += 1
    return e


def _masks_by_count(nv: int, lo: int, hi: int) -> list[int]:
    out = []
    for c in range(lo, hi + 1):
        for combo in itertools.combinations(range(nv), c):
            m = 0
            for w in combo:
                m |= 1 << w
            out.append(m)
    return out


def _attachment_steps(nv: int, size: int, edge_budget: int,
                      min_degree: int) -> Iterator[tuple[tuple[int, ...], tuple[tuple[int, int], ...]]]:
    """All ways to attach `size` new vertices to nv existing ones.

    Yields (masks, intra_edges): masks[i] is the bitmask of existing
    vertices the i-th new vertex joins; intra_edges the pairs among the
    new ones.  Every new vertex needs min_degree edges in total and the
    step at most edge_budget; masks are chosen smallest-first with the
    remaining budget threaded through, so oversized branches never open.
    """
    pair_list = list(itertools.combinations(range(size), 2))
    for intra_bits in range(1 << len(pair_list)):
        intra = tuple(p for i, p in enumerate(pair_list) if intra_bits >> i & 1)
        if len(intra) > edge_budget:
            continue
        intra_deg = [0] * size
        for a, b in intra:
            intra_deg[a] += 1
            intra_deg[b] += 1
        budget = edge_budget - len(intra)
        need = [max(0, min_degree - d) for d in intra_deg]
        if sum(need) > budget:
            continue

        def assign(i: int, left: int, acc: tuple[int, ...]):
            if i == size:
                yield acc, intra
                return
            rest = sum(need[j] for j in range(i + 1, size))
            hi = left - rest
            if hi < need[i]:
                return
            for m in _masks_by_count(nv, need[i], hi):
                yield from assign(i + 1, left - m.bit_count(), acc + (m,))

        yield from assign(0, budget, ())


def closure_extension_records(F0: ClosureType, s_next: int, alpha: float, *,
                              caps: ExtensionCaps | None = None) -> list[ExtensionTypeRecord]:
    """Enumerate the one-new-root extension types of F0, with weights.

    Candidates are grown from the s_next-closure of F0's roots: the new
    root attaches with fewer than 1/alpha edges, then extra vertices arrive
    by dense attachment steps.  Each survivor must be its own closure
    inside the glued union, form a sparse pair over F0, and stay below the
    density bound.  Never truncates: overruns raise.
    """
    if caps is None:
        caps = ExtensionCaps()
    if abs(F0.alpha_key - alpha) > GUARD_TOL:
        raise InputError(
            f"type was built at alpha={F0.alpha_key}, asked at {alpha}"
        )
    if s_next < 0:
        raise InputError("closure level must be >= 0")
    k = F0.arity
    g0 = F0.closure_graph.graph
    cl = closure(g0, tuple(range(k)), s_next, alpha)
    core, core_order = cl.graph, cl.order
    cn = core.n
    core_index = {orig: i for i, orig in enumerate(core_order)}
    for i in range(k):
        if core_index.get(i) != i:
            raise InputError("closure did not keep the roots first")
    tail = [x for x in range(g0.n) if x not in cl.vertices]
    g0_to_union = {
        x: (core_index[x] if x in core_index else None) for x in range(g0.n)
    }
    extras_cap = min(caps.extra_vertices, s_next)
    attach_cap = min(max_sparse_attach(alpha), max(cn, 0))

    work = 0

    def tick(n: int = 1) -> None:
        nonlocal work
        work += n
        if work > caps.search_nodes:
            raise CapacityError(
                f"extension-type search exceeded {caps.search_nodes} nodes; "
                f"refusing a partial enumeration"
            )

    pinned = tuple(range(cn + 1))  # the core pointwise, plus the new root
    seen: set[Graph] = set()
    queue: deque[Graph] = deque()
    for bits in range(1 << cn):
        if bits.bit_count() > min(attach_cap, caps.new_edges):
            continue
        tick()
        fg = core.with_vertex([i for i in range(cn) if bits >> i & 1])
        if not _fresh_part_sparse(fg, cn, alpha):
            continue
        key, _ = canonical_rooted(fg, pinned)
        if key not in seen:
            seen.add(key)
            queue.append(fg)
    # the fresh part must stay sparse, which bounds its edges outright;
    # lazy so sizes the search never reaches cost no boundary compares
    sparse_room: dict[int, int] = {}

    def room_for(v: int) -> int:
        if v not in sparse_room:
            sparse_room[v] = _max_sparse_edges(v, alpha)
        return sparse_room[v]

    states: list[Graph] = []
    while queue:
        fg = queue.popleft()
        states.append(fg)
        extras_used = fg.n - cn - 1
        fresh_edges = fg.edge_count - core.edge_count
        room = extras_cap - extras_used
        for m in range(1, min(s_next, room) + 1):
            budget = min(caps.new_edges - fresh_edges,
                         room_for(1 + extras_used + m) - fresh_edges)
            if budget < 2 * m - (m * (m - 1)) // 2 or budget < m:
                continue
            for masks, intra in _attachment_steps(fg.n, m, budget, 2):
                tick()
                edges = list(fg.edges())
                for i, mask in enumerate(masks):
                    edges.extend(
                        (w, fg.n + i) for w in range(fg.n) if mask >> w & 1
                    )
                edges.extend((fg.n + a, fg.n + b) for a, b in intra)
                cand = Graph(fg.n + m, edges)
                if not _is_dense_step(cand, set(range(fg.n)),
                                      range(fg.n, cand.n), alpha):
                    continue
                if not _fresh_part_sparse(cand, cn, alpha):
                    continue
                key, _ = canonical_rooted(cand, pinned)
                if key not in seen:
                    seen.add(key)
                    queue.append(cand)

    records: list[ExtensionTypeRecord] = []
    for fg in states:
        # glue the candidate onto the rest of F0's graph
        u_edges = list(fg.edges())
        base_map = []
        appended = fg.n
        for x in range(g0.n):
            if g0_to_union[x] is not None:
                base_map.append(g0_to_union[x])
            else:
                base_map.append(appended + tail.index(x))
        u_n = fg.n + len(tail)
        for a, b in g0.edges():
            u_edges.append((base_map[a], base_map[b]))
        union = Graph(u_n, u_edges)
        tick(4)
        roots_plus = tuple(range(k)) + (cn,)
        cl_u = closure(union, roots_plus, s_next, alpha, cap=union.n)
        if cl_u.vertices != frozenset(range(fg.n)):
            continue
        pair = ExtensionPair(g0, union, tuple(base_map))
        if classify_pair(pair, alpha) is not PairClass.SPARSE:
            continue
        canon, _ = canonical_rooted(fg, roots_plus)
        try:
            ct = ClosureType(
                RootedGraph(canon, tuple(range(k + 1))), s_next, float(alpha)
            )
        except InputError:
            continue
        fixed = sorted(set(base_map))
        aut = count_fixing_automorphisms(union, fixed)
        eta_count = _vertex_orbit_size(union, fixed, cn)
        records.append(ExtensionTypeRecord(
            ctype=ct,
            fresh_vertices=fg.n - cn,
            fresh_edges=fg.edge_count - core.edge_count,
            aut=aut,
            multiplicity=eta_count,
        ))
        if len(records) > caps.max_types:
            raise CapacityError(
                f"more than {caps.max_types} extension types; raise the cap "
                f"if this is intended"
            )
    records.sort(key=lambda r: (r.ctype.sort_key(), r.fresh_edges, r.aut))
    return records


def enumerate_closure_extension_types(F0: ClosureType, s_next: int, alpha: float, *,
                                      caps: ExtensionCaps | None = None) -> list[ClosureType]:
    """The extension types alone, deduplicated, in deterministic order."""
    out: list[ClosureType] = []
    seen: set[ClosureType] = set()
    for rec in closure_extension_records(F0, s_next, alpha, caps=caps):
        if rec.ctype not in seen:
            seen.add(rec.ctype)
            out.append(rec.ctype)
    return out


def eta(F0: ClosureType, F: ClosureType) -> int:
    """Number of positions the new root of F can take over F0.

    Rebuilds the glued union of F over F0 (embedding the shared closure
    core by its first root-respecting embedding into F) and counts the
    images of the new root under automorphisms fixing the F0 side.
    """
    if F.arity != F0.arity + 1:
        raise InputError("F must have exactly one more root than F0")
    if abs(F.alpha_key - F0.alpha_key) > GUARD_TOL:
        raise InputError("the two types were built at different alphas")
    k = F0.arity
    g0 = F0.closure_graph.graph
    alpha = F0.alpha_key
    cl = closure(g0, tuple(range(k)), F.s, alpha)
    core, core_order = cl.graph, cl.order
    fgraph = F.closure_graph.graph
    new_root = k  # canonical position of the added root

    # first induced embedding of the core into F: roots pinned, extras found
    extras = list(range(k, core.n))
    embedding: dict[int, int] = {i: i for i in range(k)}

    def place(pos: int) -> bool:
        if pos == len(extras):
            return True
        x = extras[pos]
        for cand in range(k + 1, fgraph.n):  # never the new root
            if cand in embedding.values():
                continue
            if all(
                core.has_edge(x, y) == fgraph.has_edge(cand, img)
                for y, img in embedding.items()
            ):
                embedding[x] = cand
                if place(pos + 1):
                    return True
                del embedding[x]
        return False

    for i in range(k):
        if not all(
            core.has_edge(i, j) == fgraph.has_edge(i, j) for j in range(i)
        ):
            raise InputError("F does not contain F0's closure core on the roots")
    if not place(0):
        raise InputError("F does not extend F0's closure core")

    tail = [x for x in range(g0.n) if x not in cl.vertices]
    core_pos = {orig: i for i, orig in enumerate(core_order)}
    base_map = []
    for x in range(g0.n):
        if x in core_pos:
            base_map.append(embedding[core_pos[x]])
        else:
            base_map.append(fgraph.n + tail.index(x))
    u_edges = list(fgraph.edges())
    for a, b in g0.edges():
        u_edges.append((base_map[a], base_map[b]))
    union = Graph(fgraph.n + len(tail), u_edges)
    return _vertex_orbit_size(union, sorted(set(base_map)), new_root)


# ---------------------------------------------------------------------------
# Expectation formulas and extension counting.


def mu_all(pair: ExtensionPair, n: int, p: float) -> float:
    """Expected number of extensions of a fixed root tuple, exactly."""
    if n < pair.base.n:
        raise InputError(f"need n >= {pair.base.n}, got {n}")
    if not (0.0 < p <= 1.0):
        raise InputError(f"edge probability must be in (0,1], got {p}")
    v, e = extension_counts(pair)
    aut = count_rooted_automorphisms(pair)
    return math.factorial(v) / aut * math.comb(n - pair.base.n, v) * p ** e


def mu_asym(pair: ExtensionPair, alpha: float) -> Asym:
    """Leading order of mu_all at p = n**-alpha: (1/aut) n^(v - alpha e)."""
    if classify_pair(pair, alpha) is not PairClass.SPARSE:
        raise InputError("expectation asymptotics need a sparse pair")
    v, e = extension_counts(pair)
    aut = count_rooted_automorphisms(pair)
    return Pow(1.0 / aut, v - alpha * e)


def count_extensions(g: Graph, u: Sequence[int], pair: ExtensionPair) -> int:
    """Number of distinct extensions of the tuple u by the pattern pair.

    Counts images: placements of the new vertices realizing at least the
    new edges, where two placements differing by a pattern automorphism
    are one extension.  Edges among the roots are not constrained.
    """
    u = tuple(int(x) for x in u)
    if len(u) != pair.base.n:
        raise InputError(
            f"tuple length {len(u)} != base vertex count {pair.base.n}"
        )
    if len(set(u)) != len(u):
        raise InputError("tuple entries must be distinct")
    for x in u:
        if not (0 <= x < g.n):
            raise InputError(f"tuple entry {x} out of range")
    anchor = {bv: u[i] for i, bv in enumerate(pair.base_vertices)}
    new = list(pair.new_vertices())
    req: dict[int, list[int]] = {w: [] for w in new}  # new vertex -> neighbors
    new_edges = pair.new_edges()
    for a, b in new_edges:
        if a in req:
            req[a].append(b)
        if b in req:
            req[b].append(a)

    # place the most-constrained new vertices first
    order: list[int] = []
    placed = set(anchor)
    rest = list(new)
    while rest:
        rest.sort(key=lambda w: (-sum(1 for x in req[w] if x in placed), w))
        w = rest.pop(0)
        order.append(w)
        placed.add(w)

    root_set = set(u)
    images: set[tuple] = set()
    assign: dict[int, int] = dict(anchor)

    def backtrack(pos: int) -> None:
        if pos == len(order):
            sig_edges = frozenset(
                (min(assign[a], assign[b]), max(assign[a], assign[b]))
                for a, b in new_edges
            )
            sig_verts = frozenset(assign[w] for w in new)
            images.add((sig_verts, sig_edges))
            return
        w = order[pos]
        anchors = [assign[x] for x in req[w] if x in assign]
        if anchors:
            cands = set(g.neighbors(anchors[0]))
            for a in anchors[1:]:
                cands &= g.neighbors(a)
        else:
            cands = set(range(g.n))
        for c in sorted(cands - root_set - set(assign[x] for x in order[:pos])):
            assign[w] = c
            backtrack(pos + 1)
            del assign[w]

    backtrack(0)
    return len(images)


# ---------------------------------------------------------------------------
# Strictly balanced chains.


def _pair_density(masks: Sequence[int], base_mask: int, base_edges: int,
                  s_mask: int) -> Fraction:
    e = _edges_inside(masks, s_mask) - base_edges
    v = s_mask.bit_count() - base_mask.bit_count()
    return Fraction(e, v)


def strictly_balanced(pair: ExtensionPair) -> bool:
    """Every proper intermediate extension is strictly less dense."""
    if pair.top.n > CLASSIFY_VERTEX_CAP:
        raise CapacityError(
            f"balance check is exhaustive; refusing |V|={pair.top.n}"
        )
    if pair.new_vertex_count < 1:
        raise InputError("balance needs at least one new vertex")
    masks = _bit_masks(pair.top)
    base_mask = 0
    for x in pair.base_vertices:
        base_mask |= 1 << x
    base_edges = pair.base.edge_count
    new = pair.new_vertices()
    full = base_mask
    for w in new:
        full |= 1 << w
    rho = _pair_density(masks, base_mask, base_edges, full)
    for bits in range(1, (1 << len(new)) - 1):
        s_mask = base_mask
        for i, w in enumerate(new):
            if bits >> i & 1:
                s_mask |= 1 << w
        if _pair_density(masks, base_mask, base_edges, s_mask) >= rho:
            return False
    return True


def strictly_balanced_chain(pair: ExtensionPair) -> list[tuple[tuple[int, ...], Graph]]:
    """Greedy chain from base to top: each link is an inclusion-minimal
    maximizer of the pair density over the previous one.

    Returns [(vertices, induced graph), ...] in top-graph labels, starting
    at the base vertices and ending at the full top graph.  Consecutive
    links are strictly balanced and their densities never increase.
    """
    if pair.top.n > CLASSIFY_VERTEX_CAP:
        raise CapacityError(
            f"chain construction is exhaustive; refusing |V|={pair.top.n}"
        )
    if pair.new_vertex_count < 1:
        raise InputError("the pair must add at least one vertex")
    masks = _bit_masks(pair.top)
    top_n = pair.top.n

    def snapshot(mask: int) -> tuple[tuple[int, ...], Graph]:
        verts = tuple(v for v in range(top_n) if mask >> v & 1)
        sub, _ = induced_subgraph(pair.top, verts)
        return verts, sub

    cur_mask = 0
    for x in pair.base_vertices:
        cur_mask |= 1 << x
    chain = [snapshot(cur_mask)]
    full_mask = (1 << top_n) - 1
    while cur_mask != full_mask:
        cur_edges = _edges_inside(masks, cur_mask)
        outside = [v for v in range(top_n) if not cur_mask >> v & 1]
        best_rho: Fraction | None = None
        maximizers: list[int] = []
        for bits in range(1, 1 << len(outside)):
            s_mask = cur_mask
            for i, v in enumerate(outside):
                if bits >> i & 1:
                    s_mask |= 1 << v
            rho = _pair_density(masks, cur_mask, cur_edges, s_mask)
            if best_rho is None or rho > best_rho:
                best_rho = rho
                maximizers = [s_mask]
            elif rho == best_rho:
                maximizers.append(s_mask)
        minimal = [
            m for m in maximizers
            if not any(o != m and o & m == o for o in maximizers)
        ]
        minimal.sort(key=lambda m: tuple(v for v in range(top_n) if m >> v & 1))
        cur_mask = minimal[0]
        chain.append(snapshot(cur_mask))
    return chain
