import pytest
from hypothesis import given, strategies as st

from cdfkit.dsl import (
    INTEGER, REAL, ArityMismatch, BinOp, Call, Compare, DSLSyntaxError, DuplicateDefinition,
    EmptySystem, If, IntLit, Neg, ParseError, RealLit, Symbol, UnboundVariable,
    UndefinedNonterminal, Var, format_expr, format_function, format_rewrite_system,
    looks_like_rewrite_system, parse_function, parse_rewrite_system, walk,
)

from helpers import FACT, FIB, PAREN


def test_successor():
    f = parse_function("succ(x) = x + 1")
    assert f.name == "succ"
    assert f.params == ("x",)
    assert f.body == BinOp("+", Var("x"), IntLit(1))
    assert f.domain_tag == INTEGER
    assert not f.is_recursive


def test_factorial_structure():
    f = parse_function(FACT)
    assert f.is_recursive
    assert isinstance(f.body, If)
    assert f.body.cond == Compare("<=", Var("n"), IntLit(0))
    calls = [e for e in walk(f.body) if isinstance(e, Call)]
    assert calls == [Call("fact", (BinOp("-", Var("n"), IntLit(1)),))]


def test_precedence():
    f = parse_function("g(x) = 1 + 2 * x ^ 2 ^ 3 - -x")
    two_pow = BinOp("^", Var("x"), BinOp("^", IntLit(2), IntLit(3)))
    expected = BinOp("-", BinOp("+", IntLit(1), BinOp("*", IntLit(2), two_pow)), Neg(Var("x")))
    assert f.body == expected


def test_aliases():
    a = parse_function("g(x) = if x == 0 then x ** 2 else x % 3")
    b = parse_function("g(x) = if x = 0 then x ^ 2 else x mod 3")
    assert a.body == b.body


def test_domain_inference_and_annotation():
    assert parse_function("h(x) = 0.5 * x").domain_tag == REAL
    assert parse_function("h(x): real = x + 1").domain_tag == REAL
    assert parse_function("h(x) = x + 1", domain=REAL).domain_tag == REAL
    with pytest.raises(DSLSyntaxError):
        parse_function("h(x): int = 0.5 * x")


def test_comments_and_blank_lines():
    f = parse_function("# a comment\n\nsucc(x) = x + 1  # trailing\n")
    assert f.body == BinOp("+", Var("x"), IntLit(1))


@pytest.mark.parametrize("text, exc", [
    ("f(x) = y + 1", UnboundVariable),
    ("f(x) = f(x, x)", ArityMismatch),
    ("f(x) = x +", DSLSyntaxError),
    ("f(x) = (x", DSLSyntaxError),
    ("f(x, x) = x", DSLSyntaxError),
    ("f(x) = x\nf(x) = x + 1", DuplicateDefinition),
    ("f(x) = x\ng(x) = x", DSLSyntaxError),
    ("f(x) = x < 1", DSLSyntaxError),
    ("", DSLSyntaxError),
])
def test_parse_errors(text, exc):
    with pytest.raises(exc) as info:
        parse_function(text)
    err = info.value
    assert isinstance(err, ParseError)
    assert err.line >= 1 and err.col >= 1
    assert err.kind == exc.__name__


def test_error_position():
    with pytest.raises(UnboundVariable) as info:
        parse_function("f(x) =\n   x + zz")
    assert (info.value.line, info.value.col) == (2, 8)


def test_rewrite_system_paren():
    g = parse_rewrite_system(PAREN)
    assert g.start_symbol == "S"
    alts = g.rules["S"]
    assert alts[0] == (Symbol("(", True), Symbol("S", False), Symbol(")", True), Symbol("S", False))
    assert alts[1] == ()


def test_rewrite_system_multi_rule():
    g = parse_rewrite_system('S -> A B\nA -> "x"\nB -> "y" | "z"\nA -> "w"')
    assert list(g.rules) == ["S", "A", "B"]
    assert len(g.rules["A"]) == 2


def test_rewrite_errors():
    with pytest.raises(EmptySystem):
        parse_rewrite_system("# nothing\n")
    with pytest.raises(UndefinedNonterminal) as info:
        parse_rewrite_system('S -> "a" T')
    assert info.value.line == 1
    with pytest.raises(DSLSyntaxError):
        parse_rewrite_system('S -> "a" |')


def test_detection():
    assert looks_like_rewrite_system(PAREN)
    assert looks_like_rewrite_system("S ::= A\nA ::= 'a'")
    assert not looks_like_rewrite_system(FIB)
    assert not looks_like_rewrite_system("# S -> T\nf(x) = x")


def test_format_round_trip_examples():
    for text in (FACT, FIB, "h(x): real = -(x - 1.5) ^ 2", "g(x) = (x + 1) * (x - 1) mod 7"):
        f = parse_function(text)
        assert parse_function(format_function(f)) == f
    g = parse_rewrite_system(PAREN)
    assert parse_rewrite_system(format_rewrite_system(g)) == g


# -- property: printing then parsing gives back the same tree -----------------

_leaf = st.one_of(
    st.integers(0, 10**6).map(IntLit),
    st.just(Var("x")),
)


def _grow(children):
    ops = st.sampled_from(["+", "-", "*", "/", "mod", "^"])
    cmp = st.sampled_from(["=", "!=", "<", "<=", ">", ">="])
    return st.one_of(
        st.builds(BinOp, ops, children, children),
        st.builds(Neg, children),
        st.builds(If, st.builds(Compare, cmp, children, children), children, children),
        st.builds(lambda a: Call("f", (a,)), children),
    )


exprs = st.recursive(_leaf, _grow, max_leaves=12)


@given(exprs)
def test_print_parse_round_trip(e):
    text = "f(x) = " + format_expr(e)
    assert parse_function(text).body == e


@given(st.floats(min_value=0, max_value=1e6, allow_nan=False))
def test_real_literal_round_trip(v):
    f = parse_function(f"h(x): real = x + {v!r}")
    assert f.body.rhs == RealLit(v)
