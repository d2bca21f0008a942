import pytest
from hypothesis import given, strategies as st

from cdfkit.dsl import parse_function
from cdfkit.evaluator import Budget
from cdfkit.semantic import (
    EmptySample, ExplicitList, IntRange, RealGrid, build_semantic, descriptive_properties,
)

from helpers import CONST, FACT, HALF, SUCC


def test_domain_specs():
    assert IntRange(0, 4).values() == [0, 1, 2, 3, 4]
    assert IntRange(0, 9, 3).values() == [0, 3, 6, 9]
    assert RealGrid(0.0, 1.0, 5).values() == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert ExplicitList((1, 2, 1, 1.0)).values() == [1, 2, 1.0]


def test_successor_pairs():
    r = build_semantic(parse_function(SUCC), IntRange(0, 9))
    assert r.pair_set() == {(x, x + 1) for x in range(10)}
    assert (3, 4) in r and (3, 5) not in r


def test_factorial_pairs():
    r = build_semantic(parse_function(FACT), ExplicitList((3, 2, 1, 0)))
    assert r.pair_set() == {(0, 1), (1, 1), (2, 2), (3, 6)}


def test_failures_are_recorded():
    r = build_semantic(parse_function(FACT), IntRange(0, 30), Budget(max_call_depth=10))
    assert set(r.pairs) == set(range(10))  # fact(9) reaches depth 10
    assert set(r.failures) == set(range(10, 31))


def test_empty_sample():
    with pytest.raises(EmptySample):
        build_semantic(parse_function(SUCC), IntRange(3, 2))


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=30))
def test_relation_is_functional(xs):
    r = build_semantic(parse_function("g(x) = x * x - 3"), ExplicitList(tuple(xs)))
    assert len(r.pairs) == len(set(xs))
    for x, y in r.pair_set():
        assert y == x * x - 3


def test_descriptive_successor():
    d = descriptive_properties(build_semantic(parse_function(SUCC), IntRange(0, 9)))
    assert d.injective_on_sample
    assert d.surjective_on_sample
    assert d.monotone_on_sample == "increasing"
    assert d.lipschitz_estimate is None


def test_descriptive_constant():
    d = descriptive_properties(build_semantic(parse_function(CONST), IntRange(0, 9)))
    assert not d.injective_on_sample
    assert d.surjective_on_sample
    assert d.monotone_on_sample == "none"


def test_descriptive_square_not_surjective():
    d = descriptive_properties(build_semantic(parse_function("g(x) = x * x"), IntRange(0, 5)))
    assert d.injective_on_sample
    assert not d.surjective_on_sample


def test_descriptive_real():
    r = build_semantic(parse_function(HALF), RealGrid(0.0, 2.0, 5))
    d = descriptive_properties(r)
    assert d.lipschitz_estimate == pytest.approx(0.5)
    assert d.max_jump == pytest.approx(0.25)
    assert d.max_second_difference == pytest.approx(0.0)
    assert d.monotone_on_sample == "increasing"
    r = build_semantic(parse_function("g(x): real = 0.0 - x"), RealGrid(0.0, 1.0, 3))
    assert descriptive_properties(r).monotone_on_sample == "decreasing"
