"""Simple undirected graphs with the exact-arithmetic helpers the type
machinery needs: induced subgraphs, rational densities, rooted isomorphism
and automorphism counting, and the plain-text graph literal format.

Vertices are always 0..n-1.  Graphs are immutable values: equality and
hashing compare the vertex count and the edge set.  Sampled graphs can be
large, so adjacency sets and degree vectors are built lazily.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import CapacityError, InputError

ISO_VERTEX_CAP = 12
DENSITY_VERTEX_CAP = 12


class Graph:
    """Immutable simple graph on vertices 0..n-1."""

    __slots__ = ("_n", "_earr", "_adj", "_deg", "_eset", "_hash")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] | np.ndarray = ()):
        if n < 0:
            raise InputError(f"vertex count must be >= 0, got {n}")
        self._n = int(n)
        if isinstance(edges, np.ndarray):
            arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
            if arr.size:
                if arr.min() < 0 or arr.max() >= n:
                    raise InputError("edge endpoint out of range")
                if (arr[:, 0] == arr[:, 1]).any():
                    raise InputError("loops are not allowed")
                arr = np.sort(arr, axis=1)
                arr = np.unique(arr, axis=0)
        else:
            seen = set()
            for u, v in edges:
                u, v = int(u), int(v)
                if not (0 <= u < n and 0 <= v < n):
                    raise InputError(f"edge ({u},{v}) out of range for n={n}")
                if u == v:
                    raise InputError(f"loop at vertex {u} is not allowed")
                seen.add((u, v) if u < v else (v, u))
            arr = np.array(sorted(seen), dtype=np.int64).reshape(-1, 2)
        arr.setflags(write=False)
        self._earr = arr
        self._adj = None
        self._deg = None
        self._eset = None
        self._hash = None

    @classmethod
    def _from_sorted_array(cls, n: int, arr: np.ndarray) -> "Graph":
        """Trusted constructor: rows already (u,v) with u<v, no duplicates."""
        g = cls.__new__(cls)
        g._n = int(n)
        arr = np.asarray(arr, dtype=np.int64).reshape(-1, 2)
        arr.setflags(write=False)
        g._earr = arr
        g._adj = None
        g._deg = None
        g._eset = None
        g._hash = None
        return g

    @property
    def n(self) -> int:
        return self._n

    @property
    def edge_count(self) -> int:
        return int(self._earr.shape[0])

    def edges(self) -> Iterator[tuple[int, int]]:
        for u, v in self._earr:
            yield int(u), int(v)

    @property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        if self._eset is None:
            self._eset = frozenset((int(u), int(v)) for u, v in self._earr)
        return self._eset

    def _adjacency(self) -> dict[int, set[int]]:
        if self._adj is None:
            adj: dict[int, set[int]] = {v: set() for v in range(self._n)}
            for u, v in self._earr:
                adj[int(u)].add(int(v))
                adj[int(v)].add(int(u))
            self._adj = adj
        return self._adj

    def neighbors(self, v: int) -> set[int]:
        """Neighbor set of v.  Treat the result as read-only."""
        return self._adjacency()[v]

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        return v in self._adjacency()[u]

    def degree(self, v: int) -> int:
        return int(self.degrees()[v])

    def degrees(self) -> np.ndarray:
        if self._deg is None:
            deg = np.bincount(self._earr.reshape(-1), minlength=self._n)
            deg.setflags(write=False)
            self._deg = deg
        return self._deg

    def with_vertex(self, neighbors: Iterable[int] = ()) -> "Graph":
        """New graph with one extra vertex n, joined to the given vertices."""
        w = self._n
        extra = [(u, w) for u in sorted(set(neighbors))]
        for u, _ in extra:
            if not (0 <= u < w):
                raise InputError(f"neighbor {u} out of range")
        if extra:
            arr = np.vstack([self._earr, np.array(extra, dtype=np.int64)])
        else:
            arr = self._earr
        return Graph._from_sorted_array(w + 1, arr)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and self.edge_set == other.edge_set

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._n, self.edge_set))
        return self._hash

    def __repr__(self) -> str:
        return f"Graph(n={self._n}, m={self.edge_count})"


@dataclass(frozen=True)
class RootedGraph:
    """A graph with an ordered tuple of pairwise distinct root vertices."""

    graph: Graph
    roots: tuple[int, ...]

    def __post_init__(self):
        for r in self.roots:
            if not (0 <= r < self.graph.n):
                raise InputError(f"root {r} out of range")
        if len(set(self.roots)) != len(self.roots):
            raise InputError("roots must be pairwise distinct")


@dataclass(frozen=True)
class ExtensionPair:
    """A rooted pattern pair: base graph embedded in a top graph.

    base_vertices[i] is the vertex of `top` that base vertex i occupies.
    The top graph restricted to those vertices must reproduce the base
    exactly, so the pair describes which vertices and edges are "new".
    """

    base: Graph
    top: Graph
    base_vertices: tuple[int, ...]

    def __post_init__(self):
        bv = self.base_vertices
        if len(bv) != self.base.n:
            raise InputError("base_vertices must list every base vertex")
        if len(set(bv)) != len(bv):
            raise InputError("base_vertices must be distinct")
        for x in bv:
            if not (0 <= x < self.top.n):
                raise InputError(f"base vertex image {x} out of range in top")
        for i in range(self.base.n):
            for j in range(i + 1, self.base.n):
                if self.base.has_edge(i, j) != self.top.has_edge(bv[i], bv[j]):
                    raise InputError(
                        "top graph restricted to base_vertices must equal base"
                    )

    @property
    def new_vertex_count(self) -> int:
        return self.top.n - self.base.n

    @property
    def new_edge_count(self) -> int:
        return self.top.edge_count - self.base.edge_count

    def new_vertices(self) -> tuple[int, ...]:
        base_set = set(self.base_vertices)
        return tuple(v for v in range(self.top.n) if v not in base_set)

    def new_edges(self) -> tuple[tuple[int, int], ...]:
        base_set = set(self.base_vertices)
        return tuple(
            (u, v)
            for u, v in self.top.edges()
            if not (u in base_set and v in base_set)
        )


def induced_subgraph(g: Graph, vertices: Iterable[int]) -> tuple[Graph, tuple[int, ...]]:
    """Induced subgraph on the given vertices, relabeled to 0..k-1.

    Returns (subgraph, mapping) where mapping[i] is the original vertex that
    became i.  Vertices are relabeled in ascending original order.
    """
    vs = sorted(set(vertices))
    for v in vs:
        if not (0 <= v < g.n):
            raise InputError(f"vertex {v} out of range")
    index = {v: i for i, v in enumerate(vs)}
    edges = []
    if len(vs) <= 64 and g.edge_count > 4 * len(vs) * len(vs):
        for i, u in enumerate(vs):
            nu = g.neighbors(u)
            for j in range(i + 1, len(vs)):
                if vs[j] in nu:
                    edges.append((i, j))
    else:
        vset = set(vs)
        for u, v in g.edges():
            if u in vset and v in vset:
                edges.append((index[u], index[v]))
    return Graph(len(vs), edges), tuple(vs)


def density(g: Graph) -> Fraction:
    """|E| / |V| as an exact rational."""
    if g.n == 0:
        raise InputError("density of the empty graph is undefined")
    return Fraction(g.edge_count, g.n)


def _adjacency_masks(g: Graph) -> list[int]:
    masks = [0] * g.n
    for u, v in g.edges():
        masks[u] |= 1 << v
        masks[v] |= 1 << u
    return masks


def max_density(g: Graph, cap: int = DENSITY_VERTEX_CAP) -> tuple[Fraction, frozenset[int]]:
    """max over nonempty vertex subsets S of |E(S)| / |S|, exact.

    Returns the maximum together with a maximizing vertex set.
    """
    if g.n == 0:
        raise InputError("max_density of the empty graph is undefined")
    if g.n > cap:
        raise CapacityError(
            f"max_density is exhaustive; refusing n={g.n} > cap {cap}"
        )
    masks = _adjacency_masks(g)
    best = Fraction(0, 1)
    best_sub = 1
    for sub in range(1, 1 << g.n):
        edges = 0
        rest = sub
        while rest:
            v = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            edges += (masks[v] & sub).bit_count()
        rho = Fraction(edges // 2, sub.bit_count())
        if rho > best:
            best = rho
            best_sub = sub
    witness = frozenset(v for v in range(g.n) if best_sub >> v & 1)
    return best, witness


def _check_iso_cap(*graphs: Graph) -> None:
    for g in graphs:
        if g.n > ISO_VERTEX_CAP:
            raise CapacityError(
                f"isomorphism search is brute force; refusing n={g.n} > {ISO_VERTEX_CAP}"
            )


def _iso_backtrack(a: Graph, b: Graph, mapping: dict[int, int], used: set[int],
                   order: Sequence[int], pos: int, count_all: bool) -> int:
    """Extend a partial vertex map a->b; count completions (or stop at 1)."""
    if pos == len(order):
        return 1
    u = order[pos]
    du = a.degree(u)
    total = 0
    for w in range(b.n):
        if w in used or b.degree(w) != du:
            continue
        ok = True
        for x, y in mapping.items():
            if a.has_edge(u, x) != b.has_edge(w, y):
                ok = False
                break
        if not ok:
            continue
        mapping[u] = w
        used.add(w)
        total += _iso_backtrack(a, b, mapping, used, order, pos + 1, count_all)
        del mapping[u]
        used.remove(w)
        if total and not count_all:
            return total
    return total


def _search_order(g: Graph, pinned: Sequence[int]) -> list[int]:
    # Most-connected-first keeps the backtracking shallow.
    rest = [v for v in range(g.n) if v not in set(pinned)]
    rest.sort(key=lambda v: -g.degree(v))
    order: list[int] = []
    placed = set(pinned)
    while rest:
        rest.sort(key=lambda v: -sum(1 for w in g.neighbors(v) if w in placed))
        v = rest.pop(0)
        order.append(v)
        placed.add(v)
    return order


def are_isomorphic_rooted(a: RootedGraph, b: RootedGraph) -> bool:
    """Isomorphism test where root i of `a` must map to root i of `b`."""
    _check_iso_cap(a.graph, b.graph)
    ga, gb = a.graph, b.graph
    if ga.n != gb.n or ga.edge_count != gb.edge_count:
        return False
    if len(a.roots) != len(b.roots):
        return False
    if sorted(ga.degrees().tolist()) != sorted(gb.degrees().tolist()):
        return False
    mapping = {}
    used = set()
    for ra, rb in zip(a.roots, b.roots):
        if ga.degree(ra) != gb.degree(rb):
            return False
        for x, y in mapping.items():
            if ga.has_edge(ra, x) != gb.has_edge(rb, y):
                return False
        mapping[ra] = rb
        used.add(rb)
    order = _search_order(ga, a.roots)
    return _iso_backtrack(ga, gb, mapping, used, order, 0, count_all=False) > 0


def count_fixing_automorphisms(g: Graph, fixed: Sequence[int] = ()) -> int:
    """Number of automorphisms of g fixing every listed vertex pointwise."""
    _check_iso_cap(g)
    fixed = tuple(fixed)
    if len(set(fixed)) != len(fixed):
        raise InputError("fixed vertices must be distinct")
    free = g.n - len(fixed)
    m = g.edge_count
    max_m = g.n * (g.n - 1) // 2
    if m == 0 or m == max_m:
        return math.factorial(free)
    mapping = {r: r for r in fixed}
    used = set(fixed)
    order = _search_order(g, fixed)
    return _iso_backtrack(g, g, mapping, used, order, 0, count_all=True)


def count_automorphisms(g: Graph) -> int:
    return count_fixing_automorphisms(g, ())


def count_rooted_automorphisms(pair: ExtensionPair) -> int:
    """Automorphisms of the top graph fixing the base pointwise."""
    return count_fixing_automorphisms(pair.top, pair.base_vertices)


def extension_counts(pair: ExtensionPair) -> tuple[int, int]:
    """(new vertex count, new edge count) of an extension pair."""
    return pair.new_vertex_count, pair.new_edge_count


# ---------------------------------------------------------------------------
# Graph literals.
#
#     # optional comments
#     n=5
#     roots=0,2        (optional)
#     0 1
#     1 2
#
# An extension pair file is two literals separated by a line "---"; the
# roots= line of the second literal gives base_vertices (where base vertex i
# sits inside the top graph).


def parse_graph_literal(text: str) -> tuple[Graph, tuple[int, ...] | None]:
    n = None
    roots: tuple[int, ...] | None = None
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("n="):
            if n is not None:
                raise InputError(f"line {lineno}: duplicate n=")
            try:
                n = int(line[2:])
            except ValueError:
                raise InputError(f"line {lineno}: bad vertex count {line[2:]!r}")
        elif line.startswith("roots="):
            body = line[len("roots="):].strip()
            try:
                roots = tuple(int(t) for t in body.split(",")) if body else ()
            except ValueError:
                raise InputError(f"line {lineno}: bad roots list {body!r}")
        else:
            parts = line.split()
            if len(parts) != 2:
                raise InputError(f"line {lineno}: expected 'u v', got {line!r}")
            try:
                edges.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise InputError(f"line {lineno}: bad edge {line!r}")
    if n is None:
        raise InputError("graph literal is missing its n= line")
    g = Graph(n, edges)
    if roots is not None:
        for r in roots:
            if not (0 <= r < n):
                raise InputError(f"root {r} out of range")
    return g, roots


def format_graph_literal(g: Graph, roots: Sequence[int] | None = None) -> str:
    lines = [f"n={g.n}"]
    if roots is not None:
        lines.append("roots=" + ",".join(str(r) for r in roots))
    for u, v in sorted(g.edges()):
        lines.append(f"{u} {v}")
    return "\n".join(lines) + "\n"


def parse_pair_literal(text: str) -> ExtensionPair:
    parts = text.split("\n---")
    if len(parts) != 2:
        raise InputError("pair file must be two graph literals separated by ---")
    base, base_roots = parse_graph_literal(parts[0])
    top, bv = parse_graph_literal(parts[1])
    if base_roots:
        raise InputError("the base literal of a pair file takes no roots= line")
    if bv is None:
        raise InputError("the top literal needs roots= giving base vertex images")
    return ExtensionPair(base, top, bv)


def format_pair_literal(pair: ExtensionPair) -> str:
    return (
        format_graph_literal(pair.base)
        + "---\n"
        + format_graph_literal(pair.top, roots=pair.base_vertices)
    )
