"""Closure machinery: density guards, cap schedules, pair classification,
closure types, and the one-new-root extension enumeration with weights."""

import math
import random
from fractions import Fraction
from itertools import combinations, permutations

import pytest

from aggraph import (
    CapacityError,
    ClosureType,
    ExtensionPair,
    Graph,
    InputError,
    IrrationalityError,
    PairClass,
    RapidSequence,
    RootedGraph,
    Sparse,
    canonical_rooted,
    classify_pair,
    closure,
    closure_extension_records,
    closure_type,
    compare_density,
    count_extensions,
    ell,
    empty_closure_type,
    enumerate_closure_extension_types,
    eta,
    induced_subgraph,
    irrationality_guard,
    max_sparse_attach,
    mu_all,
    mu_asym,
    rapid_sequence,
    sample,
    strictly_balanced,
    strictly_balanced_chain,
)

PATH3 = Graph(3, [(0, 1), (1, 2)])
PATH4 = Graph(4, [(0, 1), (1, 2), (2, 3)])
K4 = Graph(4, list(combinations(range(4), 2)))
K5 = Graph(5, list(combinations(range(5), 2)))

# root plus one new neighbor
PENDANT = ExtensionPair(Graph(1), Graph(2, [(0, 1)]), (0,))
# common neighbor of two roots
CHERRY = ExtensionPair(Graph(2), Graph(3, [(0, 2), (1, 2)]), (0, 1))
# two-vertex path hanging off the root
TAIL2 = ExtensionPair(Graph(1), Graph(3, [(0, 1), (1, 2)]), (0,))
TRIANGLE_OVER_ROOT = ExtensionPair(
    Graph(1), Graph(3, [(0, 1), (0, 2), (1, 2)]), (0,)
)


def random_graph(n: int, p: float, rnd: random.Random) -> Graph:
    return Graph(n, [e for e in combinations(range(n), 2) if rnd.random() < p])


# ---------------------------------------------------------------------------
# Density comparison and its guards.


def test_compare_density_signs():
    assert compare_density(1, 2, 0.7) == -1
    assert compare_density(3, 2, 0.7) == 1
    assert compare_density(2, 1, 0.7) == 1
    assert compare_density(0, 3, 0.5) == -1


def test_compare_density_refuses_ties():
    with pytest.raises(IrrationalityError):
        compare_density(2, 1, 0.5)
    with pytest.raises(IrrationalityError):
        compare_density(10, 7, 0.7)
    with pytest.raises(InputError):
        compare_density(-1, 2, 0.5)


def test_max_sparse_attach():
    assert max_sparse_attach(0.7) == 1
    assert max_sparse_attach(0.3) == 3
    assert max_sparse_attach(0.26) == 3
    with pytest.raises(IrrationalityError):
        max_sparse_attach(0.5)
    with pytest.raises(InputError):
        max_sparse_attach(1.0)


def test_irrationality_guard_reports_the_first_conflict():
    report = irrationality_guard(0.7, 12)
    assert not report.passed
    assert report.conflict == (10, 7)
    assert report.alpha == 0.7
    assert report.max_pattern_size == 12


def test_irrationality_guard_passes_off_the_rational_grid():
    # 0.72 = 18/25 first ties at v=18, beyond any 12-vertex pattern
    report = irrationality_guard(0.72, 12)
    assert report.passed
    assert report.conflict is None


# ---------------------------------------------------------------------------
# Cap schedules.


def test_default_cap_schedule_values():
    assert ell(2, 0) == 2
    assert ell(2, 2) == 64
    assert ell(3, 1) == 16
    assert ell(0, 1) == 4
    assert ell(2, 3) > ell(2, 2)


def test_cap_schedule_validation():
    with pytest.raises(InputError):
        ell(-1, 0)
    with pytest.raises(InputError):
        ell(2, -1)
    with pytest.raises(InputError):
        ell(2, 1, base=1)
    with pytest.raises(CapacityError):
        ell(2, 4097)


def test_rapid_sequence_unrolls_backwards():
    seq = rapid_sequence(2, 2)
    assert seq.s == (64, 2, 0)
    assert (seq.D, seq.W) == (2, 2)
    assert rapid_sequence(1, 3).s == (3, 0)
    # pluggable schedule: s_{d} = W + s_{d+1}
    assert rapid_sequence(2, 2, lambda k, s: k + s).s == (4, 2, 0)


def test_rapid_sequence_validation():
    with pytest.raises(InputError):
        rapid_sequence(0, 2)
    with pytest.raises(InputError):
        RapidSequence(1, 1, (1, 0, 0))
    with pytest.raises(InputError):
        RapidSequence(1, 1, (5, 1))
    with pytest.raises(InputError):
        RapidSequence(2, 1, (1, 5, 0))


# ---------------------------------------------------------------------------
# Pair classification.


def test_triangle_over_a_root_switches_class_with_alpha():
    assert classify_pair(TRIANGLE_OVER_ROOT, 0.8) is PairClass.DENSE
    assert classify_pair(TRIANGLE_OVER_ROOT, 0.6) is PairClass.SPARSE


@pytest.mark.parametrize("alpha", [0.2, 0.55, 0.9])
def test_pendant_is_sparse_at_any_alpha(alpha):
    assert classify_pair(PENDANT, alpha) is PairClass.SPARSE


def test_triangle_with_a_pendant_is_neither():
    # dense fails on the superset missing only the pendant, sparse fails
    # on the triangle's two new vertices
    pair = ExtensionPair(
        Graph(1), Graph(4, [(0, 1), (0, 2), (1, 2), (0, 3)]), (0,)
    )
    assert classify_pair(pair, 0.8) is PairClass.NEITHER


def test_classify_validation():
    star13 = Graph(13, [(0, i) for i in range(1, 13)])
    with pytest.raises(CapacityError):
        classify_pair(ExtensionPair(Graph(1), star13, (0,)), 0.7)
    edge = Graph(2, [(0, 1)])
    with pytest.raises(InputError):
        classify_pair(ExtensionPair(edge, edge, (0, 1)), 0.7)


# ---------------------------------------------------------------------------
# Closures of tuples.


def test_closure_absorbs_a_common_neighbor_only_when_dense():
    # middle of the path attaches with 2 edges: dense iff 2*alpha > 1
    cl = closure(PATH3, (0, 2), 1, 0.7)
    assert cl.vertices == frozenset({0, 1, 2})
    assert cl.graph.n == 3
    assert closure(PATH3, (0, 2), 1, 0.3).vertices == frozenset({0, 2})
    assert closure(PATH3, (0, 2), 0, 0.7).vertices == frozenset({0, 2})


def test_closure_reports_its_induced_subgraph():
    cl = closure(PATH3, (0, 2), 1, 0.7)
    sub, order = induced_subgraph(PATH3, sorted(cl.vertices))
    assert cl.graph == sub
    assert cl.order == order


def test_closure_validation():
    with pytest.raises(InputError, match="level"):
        closure(PATH3, (0,), -1, 0.7)
    with pytest.raises(InputError, match="out of range"):
        closure(PATH3, (0, 7), 1, 0.7)


def test_closure_cap_overflow_raises():
    with pytest.raises(CapacityError, match="size cap"):
        closure(K5, (0,), 2, 0.9, cap=3)


def test_closure_properties_on_random_graphs():
    rnd = random.Random(4821)
    for _ in range(25):
        g = random_graph(9, 0.35, rnd)
        u = tuple(rnd.sample(range(9), 2))
        cl1 = closure(g, u, 1, 0.55, cap=g.n)
        cl2 = closure(g, u, 2, 0.55, cap=g.n)
        assert set(u) <= cl1.vertices
        assert cl1.vertices <= cl2.vertices
        again = closure(g, tuple(sorted(cl1.vertices)), 1, 0.55, cap=g.n)
        assert again.vertices == cl1.vertices


# ---------------------------------------------------------------------------
# Canonical rooted form and closure types.


def test_canonical_rooted_pins_roots_first():
    canon, order = canonical_rooted(PATH3, (2,))
    assert order[0] == 2
    assert canon.n == 3
    assert sorted(canon.edges()) == [(0, 2), (1, 2)]


def test_canonical_rooted_is_relabeling_invariant():
    rnd = random.Random(911)
    for _ in range(20):
        g = random_graph(7, 0.4, rnd)
        roots = tuple(rnd.sample(range(7), rnd.randint(1, 3)))
        perm = list(range(7))
        rnd.shuffle(perm)
        h = Graph(7, [(perm[a], perm[b]) for a, b in g.edges()])
        canon_g, order_g = canonical_rooted(g, roots)
        canon_h, order_h = canonical_rooted(h, tuple(perm[r] for r in roots))
        assert canon_g == canon_h
        assert order_g[: len(roots)] == roots
        # order maps canonical labels back onto the original graph
        for i, j in combinations(range(7), 2):
            assert canon_g.has_edge(i, j) == g.has_edge(order_g[i], order_g[j])


def test_closure_type_rejects_inadmissible_cores():
    with pytest.raises(InputError, match="not"):
        ClosureType(RootedGraph(K4, (0,)), 0, 0.8)
    with pytest.raises(InputError, match="canonically rooted"):
        ClosureType(RootedGraph(Graph(2, [(0, 1)]), (1,)), 0, 0.7)
    with pytest.raises(InputError, match="level"):
        ClosureType(RootedGraph(Graph(1), (0,)), -1, 0.7)


def test_closure_type_canonicalizes_the_tuple_closure():
    t = closure_type(PATH3, (0, 2), 1, 0.7)
    assert t.arity == 2
    assert t.s == 1
    assert t.graph == Graph(3, [(0, 2), (1, 2)])
    # repeats collapse to the distinct prefix
    assert closure_type(PATH3, (1, 1), 0, 0.7).arity == 1


# ---------------------------------------------------------------------------
# Counting extensions and their expectations.


def test_count_extensions_oracles():
    assert count_extensions(PATH4, (1,), PENDANT) == 2
    assert count_extensions(PATH4, (0, 2), CHERRY) == 1
    assert count_extensions(K4, (0, 1), CHERRY) == 2
    assert count_extensions(PATH4, (0,), TAIL2) == 1
    assert count_extensions(K4, (0,), TAIL2) == 6
    assert count_extensions(K4, (0,), TRIANGLE_OVER_ROOT) == 3
    k4_over_vertex = ExtensionPair(Graph(1), K4, (0,))
    assert count_extensions(K5, (0,), k4_over_vertex) == 4


def brute_extension_count(g: Graph, u: tuple, pair: ExtensionPair) -> int:
    """Place new vertices injectively off the roots, demand the new edges,
    and count distinct images by (vertex set, mapped edge set)."""
    new = list(pair.new_vertices())
    new_edges = pair.new_edges()
    anchor = dict(zip(pair.base_vertices, u))
    candidates = [x for x in range(g.n) if x not in set(u)]
    images = set()
    for placement in permutations(candidates, len(new)):
        phi = dict(anchor)
        phi.update(zip(new, placement))
        if all(g.has_edge(phi[a], phi[b]) for a, b in new_edges):
            mapped = frozenset(
                frozenset((phi[a], phi[b])) for a, b in new_edges
            )
            images.add((frozenset(placement), mapped))
    return len(images)


@pytest.mark.parametrize("pair", [PENDANT, CHERRY, TAIL2, TRIANGLE_OVER_ROOT])
def test_count_extensions_matches_brute_force(pair):
    rnd = random.Random(1000 + 10 * pair.top.n + pair.top.edge_count)
    for _ in range(15):
        n = rnd.randint(5, 7)
        g = random_graph(n, 0.45, rnd)
        u = tuple(rnd.sample(range(n), pair.base.n))
        assert count_extensions(g, u, pair) == brute_extension_count(g, u, pair)


def test_count_extensions_validation():
    with pytest.raises(InputError, match="length"):
        count_extensions(PATH4, (0, 1), PENDANT)
    with pytest.raises(InputError, match="distinct"):
        count_extensions(PATH4, (0, 0), CHERRY)
    with pytest.raises(InputError, match="range"):
        count_extensions(PATH4, (9,), PENDANT)


def test_expected_extension_counts():
    assert mu_all(PENDANT, 10, 0.3) == pytest.approx(9 * 0.3)
    assert mu_all(CHERRY, 10, 0.5) == pytest.approx(8 * 0.25)
    assert mu_all(TRIANGLE_OVER_ROOT, 10, 0.5) == pytest.approx(
        math.comb(9, 2) * 0.5 ** 3
    )
    with pytest.raises(InputError):
        mu_all(CHERRY, 1, 0.5)
    with pytest.raises(InputError):
        mu_all(PENDANT, 10, 0.0)
    with pytest.raises(InputError):
        mu_all(PENDANT, 10, 1.5)


def test_expected_counts_match_the_exhaustive_average():
    # every graph on 5 vertices, weighted exactly
    n, pairs_all = 5, list(combinations(range(5), 2))
    graphs = []
    for bits in range(1 << len(pairs_all)):
        edges = [e for i, e in enumerate(pairs_all) if bits >> i & 1]
        graphs.append((len(edges), Graph(n, edges)))
    for pair in (PENDANT, CHERRY, TAIL2, TRIANGLE_OVER_ROOT):
        u = tuple(range(pair.base.n))
        counts = [(e, count_extensions(g, u, pair)) for e, g in graphs]
        for p in (Fraction(1, 2), Fraction(1, 4)):
            mean = sum(
                p ** e * (1 - p) ** (len(pairs_all) - e) * c
                for e, c in counts
            )
            assert float(mean) == pytest.approx(mu_all(pair, n, float(p)))


def test_expectation_asymptotics():
    w = mu_asym(PENDANT, 0.7)
    assert (w.c, w.gamma) == (1.0, pytest.approx(0.3))
    # a common neighbor is a sparse extension only below alpha = 1/2
    assert mu_asym(CHERRY, 0.3).gamma == pytest.approx(0.4)
    with pytest.raises(InputError, match="sparse"):
        mu_asym(CHERRY, 0.7)
    tri = mu_asym(TRIANGLE_OVER_ROOT, 0.6)
    assert tri.c == pytest.approx(0.5)  # two automorphisms swap the new pair
    assert tri.gamma == pytest.approx(0.2)
    with pytest.raises(InputError, match="sparse"):
        mu_asym(TRIANGLE_OVER_ROOT, 0.8)


# ---------------------------------------------------------------------------
# Extension types over a closure type.


ROOT1 = ClosureType(RootedGraph(Graph(1), (0,)), 0, 0.7)


def test_new_root_positions_over_the_base():
    edge_over_nothing = ClosureType(RootedGraph(Graph(2, [(0, 1)]), (0,)), 0, 0.7)
    assert eta(empty_closure_type(0, 0.7), edge_over_nothing) == 2
    star = ClosureType(RootedGraph(Graph(3, [(0, 1), (0, 2)]), (0,)), 0, 0.7)
    assert eta(empty_closure_type(0, 0.7), star) == 1
    edge_over_root = ClosureType(RootedGraph(Graph(2, [(0, 1)]), (0, 1)), 0, 0.7)
    assert eta(ROOT1, edge_over_root) == 1


def test_eta_validation():
    with pytest.raises(InputError, match="one more root"):
        eta(ROOT1, ROOT1)
    other_alpha = ClosureType(RootedGraph(Graph(2, [(0, 1)]), (0, 1)), 0, 0.6)
    with pytest.raises(InputError, match="alphas"):
        eta(ROOT1, other_alpha)


def records_by_fresh(records):
    table = {(r.fresh_vertices, r.fresh_edges): r for r in records}
    assert len(table) == len(records)
    return table


def test_extension_records_at_level_zero():
    table = records_by_fresh(closure_extension_records(ROOT1, 0, 0.7))
    assert set(table) == {(1, 0), (1, 1)}
    isolated = table[(1, 0)]
    assert isolated.ctype.graph == Graph(2)
    assert isolated.ctype.s == 0
    assert (isolated.aut, isolated.multiplicity) == (1, 1)
    w = isolated.weight_asym(0.7)
    assert (w.c, w.gamma) == (1.0, 1.0)
    pendant = table[(1, 1)]
    assert pendant.ctype.graph == Graph(2, [(0, 1)])
    assert pendant.weight_asym(0.7).gamma == pytest.approx(0.3)


def test_level_one_admits_a_common_neighbor():
    table = records_by_fresh(closure_extension_records(ROOT1, 1, 0.7))
    assert set(table) == {(1, 0), (1, 1), (2, 2)}
    cherry = table[(2, 2)]
    assert cherry.ctype.graph == Graph(3, [(0, 2), (1, 2)])
    assert cherry.ctype.s == 1
    assert (cherry.aut, cherry.multiplicity) == (1, 1)
    assert cherry.weight_asym(0.7).gamma == pytest.approx(0.6)


def test_lower_alpha_admits_the_triangle():
    # fresh part 3 edges on 2 vertices passes the sparse test only below 2/3
    base = ClosureType(RootedGraph(Graph(1), (0,)), 0, 0.6)
    table = records_by_fresh(closure_extension_records(base, 1, 0.6))
    assert set(table) == {(1, 0), (1, 1), (2, 2), (2, 3)}
    tri = table[(2, 3)]
    assert (tri.aut, tri.multiplicity) == (2, 2)
    w = tri.weight_asym(0.6)
    assert w.c == 1.0
    assert w.gamma == pytest.approx(0.2)


def test_the_isolated_type_is_always_present():
    for s_next, alpha in [(0, 0.7), (1, 0.7), (1, 0.6), (2, 0.72)]:
        base = ClosureType(RootedGraph(Graph(1), (0,)), 0, alpha)
        records = closure_extension_records(base, s_next, alpha)
        assert any(
            (r.fresh_vertices, r.fresh_edges) == (1, 0) for r in records
        )


def test_extension_records_over_the_empty_type():
    for s_next in (0, 1):
        records = closure_extension_records(empty_closure_type(0, 0.7), s_next, 0.7)
        assert len(records) == 1
        assert (records[0].fresh_vertices, records[0].fresh_edges) == (1, 0)


def test_extension_types_deduplicate_records():
    records = closure_extension_records(ROOT1, 1, 0.7)
    types = enumerate_closure_extension_types(ROOT1, 1, 0.7)
    assert len(types) == len(records)
    assert set(types) == {r.ctype for r in records}


def test_extension_records_alpha_mismatch():
    with pytest.raises(InputError, match="asked at"):
        closure_extension_records(ROOT1, 0, 0.8)


# ---------------------------------------------------------------------------
# Balance.


def test_strictly_balanced_cases():
    assert strictly_balanced(PENDANT)
    assert strictly_balanced(TRIANGLE_OVER_ROOT)
    assert not strictly_balanced(TAIL2)  # the near half is already as dense
    star13 = Graph(13, [(0, i) for i in range(1, 13)])
    with pytest.raises(CapacityError):
        strictly_balanced(ExtensionPair(Graph(1), star13, (0,)))
    edge = Graph(2, [(0, 1)])
    with pytest.raises(InputError):
        strictly_balanced(ExtensionPair(edge, edge, (0, 1)))


def test_balanced_chain_splits_the_tail():
    chain = strictly_balanced_chain(TAIL2)
    assert [vs for vs, _ in chain] == [(0,), (0, 1), (0, 1, 2)]
    assert [sorted(g.edges()) for _, g in chain] == [
        [], [(0, 1)], [(0, 1), (1, 2)]
    ]
    assert [vs for vs, _ in strictly_balanced_chain(TRIANGLE_OVER_ROOT)] == [
        (0,), (0, 1, 2)
    ]
    assert [vs for vs, _ in strictly_balanced_chain(PENDANT)] == [(0,), (0, 1)]


def chain_links_as_pairs(chain):
    for (prev_vs, _), (next_vs, next_g) in zip(chain, chain[1:]):
        positions = tuple(next_vs.index(v) for v in prev_vs)
        sub, _ = induced_subgraph(next_g, positions)
        # relabel the base to match the link graph's own labels
        yield ExtensionPair(sub, next_g, tuple(sorted(positions)))


def link_density(pair: ExtensionPair) -> Fraction:
    return Fraction(
        pair.top.edge_count - pair.base.edge_count, pair.new_vertex_count
    )


def test_balanced_chain_properties_on_random_pairs():
    rnd = random.Random(26016)
    for _ in range(20):
        n = rnd.randint(3, 7)
        top = random_graph(n, 0.5, rnd)
        pair = ExtensionPair(Graph(1), top, (0,))
        chain = strictly_balanced_chain(pair)
        assert chain[0][0] == (0,)
        assert chain[-1][0] == tuple(range(n))
        links = list(chain_links_as_pairs(chain))
        for link in links:
            assert strictly_balanced(link)
        densities = [link_density(link) for link in links]
        assert all(a >= b for a, b in zip(densities, densities[1:]))


# ---------------------------------------------------------------------------
# Closures of sampled sparse graphs stay small.


def test_sampled_sparse_closures_stay_small():
    g = sample(2000, Sparse(0.72), seed=77)
    rnd = random.Random(1)
    sizes = []
    for _ in range(60):
        u = (rnd.randrange(2000), rnd.randrange(2000))
        sizes.append(len(closure(g, u, 1, 0.72).vertices))
    assert max(sizes) <= ell(2, 1)
    assert sum(1 for s in sizes if s <= 4) >= 54
