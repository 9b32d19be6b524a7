"""Leading-order value arithmetic."""

import pytest
from hypothesis import given, strategies as st

from aggraph import (
    Pow,
    ZERO,
    asym_max,
    asym_min,
    asym_scale,
    asym_sum,
    asym_times_n,
    is_zero,
)

pows = st.builds(
    Pow,
    st.floats(1e-6, 1e6, allow_nan=False),
    st.floats(-5, 5, allow_nan=False),
)
asyms = st.one_of(st.just(ZERO), pows)


def test_pow_requires_a_positive_coefficient():
    with pytest.raises(ValueError):
        Pow(0.0, 1.0)
    with pytest.raises(ValueError):
        Pow(-1.0, 1.0)


def test_zero_is_a_singleton():
    assert is_zero(ZERO)
    assert ZERO.value_at(10.0) == 0.0
    assert not is_zero(Pow(1.0, 0.0))


def test_sum_keeps_the_largest_exponent_and_adds_ties():
    got = asym_sum([Pow(2.0, 1.0), Pow(3.0, 1.0), Pow(100.0, 0.5), ZERO])
    assert got == Pow(5.0, 1.0)
    assert asym_sum([ZERO, ZERO]) is ZERO


def test_sum_treats_near_equal_exponents_as_ties():
    got = asym_sum([Pow(1.0, 1.0), Pow(1.0, 1.0 + 1e-12)])
    assert got.c == pytest.approx(2.0)


def test_max_is_lexicographic_and_ignores_zero():
    assert asym_max([ZERO, Pow(1.0, 2.0), Pow(9.0, 1.0)]) == Pow(1.0, 2.0)
    assert asym_max([Pow(1.0, 1.0), Pow(4.0, 1.0)]) == Pow(4.0, 1.0)
    assert asym_max([ZERO]) is ZERO


def test_min_is_absorbed_by_zero():
    assert asym_min([Pow(1.0, 2.0), ZERO]) is ZERO
    assert asym_min([Pow(1.0, 2.0), Pow(9.0, 1.0)]) == Pow(9.0, 1.0)
    assert asym_min([Pow(4.0, 1.0), Pow(1.0, 1.0)]) == Pow(1.0, 1.0)
    with pytest.raises(ValueError):
        asym_min([])


def test_scale_shifts_both_parts():
    assert asym_scale(Pow(2.0, 1.0), 3.0, 0.5) == Pow(6.0, 1.5)
    assert asym_scale(ZERO, 3.0) is ZERO
    assert asym_times_n(Pow(2.0, 1.0)) == Pow(2.0, 2.0)
    with pytest.raises(ValueError):
        asym_scale(Pow(1.0, 0.0), 0.0)


@given(st.lists(asyms, min_size=1, max_size=6))
def test_sum_dominates_max_dominates_min(items):
    """At large n the three combinations order as sum >= max >= min."""
    n = 1e9
    s = asym_sum(items).value_at(n)
    mx = asym_max(items).value_at(n)
    mn = asym_min(items).value_at(n)
    assert s >= mx * (1 - 1e-9)
    assert mx >= mn * (1 - 1e-9)


@given(st.lists(pows, min_size=1, max_size=6))
def test_max_and_min_stay_within_the_family(items):
    """Selection never invents a coefficient; exponents match up to ties."""
    for got in (asym_max(items), asym_min(items)):
        assert any(p.c == got.c for p in items)
        assert any(abs(p.gamma - got.gamma) <= 1e-8 for p in items)
