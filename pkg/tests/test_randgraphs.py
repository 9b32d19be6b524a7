"""Seeded graph sampling: determinism, substreams, regime parameters."""

import math

import pytest

from aggraph import Dense, InputError, Sparse, edge_probability, sample


def test_dense_probability_is_constant():
    assert edge_probability(Dense(0.3), 10) == 0.3
    assert edge_probability(Dense(0.3), 100000) == 0.3


def test_sparse_probability_decays_polynomially():
    r = Sparse(0.7)
    assert edge_probability(r, 10) == pytest.approx(10 ** -0.7)
    assert edge_probability(r, 1) == 1.0
    # n^-alpha, so doubling n scales by 2^-alpha
    assert edge_probability(r, 200) / edge_probability(r, 100) == pytest.approx(
        2 ** -0.7
    )


def test_regime_parameters_are_validated():
    for bad in (0.0, 1.0, -0.5, 1.5):
        with pytest.raises(InputError):
            Dense(bad)
        with pytest.raises(InputError):
            Sparse(bad)
    with pytest.raises(InputError):
        edge_probability(Dense(0.5), 0)


def test_same_seed_and_replicate_reproduce_the_graph():
    a = sample(40, Dense(0.5), seed=7, replicate=3)
    b = sample(40, Dense(0.5), seed=7, replicate=3)
    assert a == b


def test_replicates_and_seeds_give_distinct_graphs():
    base = sample(40, Dense(0.5), seed=7, replicate=0)
    assert base != sample(40, Dense(0.5), seed=7, replicate=1)
    assert base != sample(40, Dense(0.5), seed=8, replicate=0)


def test_single_vertex_graph_is_empty():
    g = sample(1, Dense(0.5), seed=1)
    assert g.n == 1 and g.edge_count == 0


def test_arguments_are_validated():
    with pytest.raises(InputError):
        sample(0, Dense(0.5), seed=1)
    with pytest.raises(InputError):
        sample(5, Dense(0.5), seed=1, replicate=-1)


def test_edge_count_matches_the_regime_probability():
    # Binomial(C(n,2), p) concentrates tightly at this size.
    n, p = 300, 0.3
    g = sample(n, Dense(p), seed=42)
    pairs = n * (n - 1) / 2
    mean = pairs * p
    sd = math.sqrt(pairs * p * (1 - p))
    assert abs(g.edge_count - mean) < 6 * sd


def test_sparse_graphs_are_actually_sparse():
    g = sample(2000, Sparse(0.7), seed=11)
    pairs = 2000 * 1999 / 2
    expected = pairs * 2000 ** -0.7
    assert 0.8 * expected < g.edge_count < 1.2 * expected
