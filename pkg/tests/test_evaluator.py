import math

import pytest
from hypothesis import given, strategies as st

from cdfkit.dsl import parse_function
from cdfkit.evaluator import (
    Budget, CallNode, DepthExceeded, DerivTree, DivisionByZero, DomainError, LeafNode,
    MagnitudeExceeded, OpNode, StepsExceeded, call_children, evaluate, evaluate_traced,
    run_traced, tree_metrics, trees_equal,
)

from helpers import CONST, FACT, FIB, IDENT, SUCC, count_eval


def fib_iter(n):
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def test_factorial_values():
    f = parse_function(FACT)
    assert [evaluate(f, n).value for n in range(8)] == [1, 1, 2, 6, 24, 120, 720, 5040]
    assert evaluate(f, 30).value == math.factorial(30)


def test_factorial_steps_and_depth():
    f = parse_function(FACT)
    ev = evaluate(f, 3)
    assert (ev.value, ev.steps, ev.max_depth) == (6, 35, 4)
    for n in range(10):
        assert evaluate(f, n).steps == 10 * n + 5


def test_fibonacci_matches_iterative():
    f = parse_function(FIB)
    for n in range(16):
        assert evaluate(f, n).value == fib_iter(n)


def test_identity_and_constant():
    assert evaluate(parse_function(IDENT), 17).value == 17
    ev = evaluate(parse_function(CONST), 99)
    assert (ev.value, ev.steps, ev.max_depth) == (4, 1, 1)


@pytest.mark.parametrize("src", [SUCC, FACT, FIB, CONST,
                                 "g(x) = if x mod 2 = 0 then x / 2 else 3 * x + 1",
                                 "h(n) = if n < 1 then 0 else h(n - 1) + h(n - 1) * 2 - n"])
def test_steps_match_counting_oracle(src):
    f = parse_function(src)
    for n in range(0, 12):
        value, steps, depth = count_eval(f, n)
        ev = evaluate(f, n)
        assert (ev.value, ev.steps, ev.max_depth) == (value, steps, depth)


def test_memoized_value_agrees():
    f = parse_function(FIB)
    assert evaluate(f, 60, memoize=True).value == fib_iter(60)


def test_deep_recursion_is_iterative():
    f = parse_function(FACT)
    ev = evaluate(f, 5000)
    assert ev.max_depth == 5001
    assert ev.value == math.factorial(5000)


def test_budget_errors():
    f = parse_function(FACT)
    with pytest.raises(DepthExceeded):
        evaluate(f, 50, Budget(max_call_depth=10))
    with pytest.raises(StepsExceeded):
        evaluate(f, 50, Budget(max_eval_steps=100))
    with pytest.raises(DivisionByZero):
        evaluate(parse_function("g(x) = 1 / x"), 0)
    with pytest.raises(DivisionByZero):
        evaluate(parse_function("g(x) = 1 mod x"), 0)
    with pytest.raises(MagnitudeExceeded):
        evaluate(parse_function("g(x): real = x * 1.0e10"), 1e5)
    with pytest.raises(DomainError):
        evaluate(parse_function("g(x) = 2 ^ x"), -1)
    with pytest.raises(ValueError):
        Budget(max_call_depth=0)


def test_integer_semantics():
    assert evaluate(parse_function("g(x) = x / 2"), -7).value == -4
    assert evaluate(parse_function("g(x) = x mod 3"), -7).value == 2


@given(st.integers(0, 60), st.integers(1, 400), st.integers(1, 60))
def test_budget_monotone(n, steps, depth):
    # a run that fits a budget also fits any larger budget, with the same result
    f = parse_function(FACT)
    small = Budget(max_call_depth=depth, max_eval_steps=steps)
    big = Budget(max_call_depth=depth + 10, max_eval_steps=steps * 2)
    try:
        a = evaluate(f, n, small)
    except (DepthExceeded, StepsExceeded):
        return
    b = evaluate(f, n, big)
    assert (a.value, a.steps, a.max_depth) == (b.value, b.steps, b.max_depth)


def test_factorial_trace_is_chain():
    tree = evaluate_traced(parse_function(FACT), 3)
    assert tree.node == CallNode("fact", (3,))
    assert tree.result == 6
    chain = []
    t = tree
    while t is not None:
        chain.append((t.node.arg, t.result))
        kids = call_children(t)
        assert len(kids) <= 1
        t = kids[0] if kids else None
    assert chain == [(3, 6), (2, 2), (1, 1), (0, 1)]
    m = tree_metrics(tree)
    assert (m.depth, m.node_count, m.max_branching) == (4, 4, 1)


def test_fib_trace_shape():
    tree = evaluate_traced(parse_function(FIB), 5)
    m = tree_metrics(tree)
    assert (m.depth, m.node_count, m.max_branching) == (5, 15, 2)


@pytest.mark.parametrize("src, n", [(FACT, 6), (FIB, 7), (SUCC, 3)])
def test_trace_coherence(src, n):
    # each call node's result is what the function returns on that argument
    f = parse_function(src)
    run = run_traced(f, n)
    assert run.value == run.tree.result == evaluate(f, n).value
    for t in run.tree.iter_preorder():
        if isinstance(t.node, CallNode):
            assert evaluate(f, t.node.arg).value == t.result


def test_detail_trace():
    f = parse_function(FACT)
    plain = evaluate_traced(f, 2)
    detail = evaluate_traced(f, 2, detail=True)
    assert not trees_equal(plain, detail)
    assert detail.result == 2
    kinds = {type(t.node) for t in detail.iter_preorder()}
    assert kinds == {CallNode, OpNode, LeafNode}
    assert tree_metrics(detail).depth == tree_metrics(plain).depth


def test_tree_equality_is_typed():
    a = DerivTree(CallNode("f", (1,)), 1)
    b = DerivTree(CallNode("f", (1.0,)), 1.0)
    c = DerivTree(CallNode("f", (1,)), 1)
    assert a == c
    assert a != b
