"""Shared fixtures and small independent oracles for the test-suite."""
from pathlib import Path

from cdfkit.dsl import BinOp, Call, Compare, If, IntLit, Neg, RealLit, Var

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
GOLDEN = Path(__file__).resolve().parent / "golden"
SCHEMA = ROOT / "schemas" / "report.v1.json"

SUCC = "succ(x) = x + 1"
FACT = "fact(n) = if n <= 0 then 1 else n * fact(n - 1)"
FIB = "fib(n) = if n < 2 then n else fib(n - 1) + fib(n - 2)"
CONST = "k(x) = 4"
IDENT = "id(x) = x"
LOGISTIC4 = "logistic(x): real = 4.0 * x * (1.0 - x)"
LOGISTIC2 = "logistic(x): real = 2.0 * x * (1.0 - x)"
HALF = "half(x): real = 0.5 * x"
TENT = "tent(x): real = if x < 0.5 then 2.0 * x else 2.0 * (1.0 - x)"
PAREN = 'S -> "(" S ")" S | ""'
XY = 'S -> "x" | "y"'


def count_eval(f, x):
    """Plain recursive interpreter that counts visited nodes.

    Written separately from the package evaluator; used as a step-count oracle
    on small inputs.  Returns (value, steps, max_depth).
    """
    steps = 0
    max_depth = 1

    def ev(e, env, depth):
        nonlocal steps, max_depth
        steps += 1
        if isinstance(e, (IntLit, RealLit)):
            return e.value
        if isinstance(e, Var):
            return env[e.name]
        if isinstance(e, Neg):
            return -ev(e.expr, env, depth)
        if isinstance(e, BinOp):
            a = ev(e.lhs, env, depth)
            b = ev(e.rhs, env, depth)
            if e.op == "+":
                return a + b
            if e.op == "-":
                return a - b
            if e.op == "*":
                return a * b
            if e.op == "/":
                return a // b if isinstance(a, int) and isinstance(b, int) else a / b
            if e.op == "mod":
                return a % b
            return a ** b
        if isinstance(e, Compare):
            a = ev(e.lhs, env, depth)
            b = ev(e.rhs, env, depth)
            return {"=": a == b, "!=": a != b, "<": a < b, "<=": a <= b,
                    ">": a > b, ">=": a >= b}[e.op]
        if isinstance(e, If):
            return ev(e.then if ev(e.cond, env, depth) else e.orelse, env, depth)
        if isinstance(e, Call):
            args = [ev(a, env, depth) for a in e.args]
            max_depth = max(max_depth, depth + 1)
            return ev(f.body, dict(zip(f.params, args)), depth + 1)
        raise TypeError(e)

    value = ev(f.body, {f.params[0]: x}, 1)
    return value, steps, max_depth
