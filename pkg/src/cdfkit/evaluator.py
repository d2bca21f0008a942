"""Big-step evaluation with budgets and optional derivation traces.

The interpreter runs on an explicit work stack, so call depth is bounded only
by :class:`Budget`, never by the Python recursion limit.  A *step* is one
expression node visited.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .dsl import REAL, BinOp, Call, Compare, If, IntLit, Neg, RealLit, Var

# Integer products and powers larger than this many bits are refused; exact
# arithmetic never overflows, but memory does.
MAX_INT_BITS = 1 << 22


@dataclass(frozen=True)
class Budget:
    max_call_depth: int = 10_000
    max_eval_steps: int = 1_000_000
    magnitude_bound: float = 1e12

    def __post_init__(self):
        if self.max_call_depth <= 0 or self.max_eval_steps <= 0 or not self.magnitude_bound > 0:
            raise ValueError("budget limits must be strictly positive")


class EvalError(Exception):
    """Evaluation did not produce a value within budget."""

    def __init__(self, message, steps=0, depth=0):
        super().__init__(message)
        self.steps = steps
        self.depth = depth

    @property
    def kind(self):
        return type(self).__name__


class DepthExceeded(EvalError):
    pass


class StepsExceeded(EvalError):
    pass


class MagnitudeExceeded(EvalError):
    pass


class DivisionByZero(EvalError):
    pass


class DomainError(EvalError):
    """Argument outside an operator's domain (negative integer exponent, complex power)."""


# ---------------------------------------------------------------------------
# Derivation trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CallNode:
    function: str
    args: tuple

    @property
    def arg(self):
        return self.args[0] if len(self.args) == 1 else self.args


@dataclass(frozen=True)
class OpNode:
    operator: str


@dataclass(frozen=True)
class LeafNode:
    value: object


class DerivTree:
    """Ordered derivation tree; equality is structural and iterative."""

    __slots__ = ("node", "result", "children")

    def __init__(self, node, result, children=()):
        self.node = node
        self.result = result
        self.children = tuple(children)

    def __eq__(self, other):
        if not isinstance(other, DerivTree):
            return NotImplemented
        return trees_equal(self, other)

    __hash__ = None

    def __repr__(self):
        return f"DerivTree({self.node!r}, result={self.result!r}, children={len(self.children)})"

    def iter_preorder(self):
        stack = [self]
        while stack:
            t = stack.pop()
            yield t
            stack.extend(reversed(t.children))


def _label_key(v):
    # 1 == 1.0 == True in Python; structural identity must keep them apart
    return (type(v).__name__, v)


def trees_equal(a, b):
    """Ordered labelled-tree isomorphism with equal labels."""
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if type(x.node) is not type(y.node):
            return False
        if isinstance(x.node, CallNode):
            if x.node.function != y.node.function or len(x.node.args) != len(y.node.args):
                return False
            if any(_label_key(p) != _label_key(q) for p, q in zip(x.node.args, y.node.args)):
                return False
        elif isinstance(x.node, OpNode):
            if x.node.operator != y.node.operator:
                return False
        elif _label_key(x.node.value) != _label_key(y.node.value):
            return False
        if _label_key(x.result) != _label_key(y.result):
            return False
        if len(x.children) != len(y.children):
            return False
        stack.extend(zip(x.children, y.children))
    return True


@dataclass(frozen=True)
class TreeMetrics:
    depth: int
    node_count: int
    max_branching: int


def call_children(tree):
    """CallNode descendants reachable without crossing another CallNode."""
    out = []
    stack = list(reversed(tree.children))
    while stack:
        t = stack.pop()
        if isinstance(t.node, CallNode):
            out.append(t)
        else:
            stack.extend(reversed(t.children))
    return out


def tree_metrics(tree):
    """Depth and branching measured over the call structure; node_count over all nodes.

    A tree with no CallNode at all (a bare leaf) has depth 1.
    """
    node_count = sum(1 for _ in tree.iter_preorder())
    depth = 1
    max_branching = 0
    # (subtree, CallNodes on the path so far)
    start = 1 if isinstance(tree.node, CallNode) else 0
    stack = [(tree, start)]
    while stack:
        t, d = stack.pop()
        depth = max(depth, d)
        if isinstance(t.node, CallNode):
            kids = call_children(t)
            max_branching = max(max_branching, len(kids))
            stack.extend((k, d + 1) for k in kids)
        else:
            for k in call_children(t):
                stack.append((k, d + 1))
    return TreeMetrics(depth=depth, node_count=node_count, max_branching=max_branching)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Evaluation:
    value: object
    steps: int
    max_depth: int
    tree: DerivTree | None = None


def coerce_arg(f, x):
    """Convert ``x`` to the function's domain, rejecting lossy conversions."""
    if f.domain_tag == REAL:
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise TypeError(f"real-domain argument expected, got {x!r}")
        return float(x)
    if isinstance(x, bool):
        raise TypeError("bool is not an integer argument")
    if isinstance(x, float):
        if not x.is_integer():
            raise TypeError(f"integer-domain argument expected, got {x!r}")
        return int(x)
    if not isinstance(x, int):
        raise TypeError(f"integer-domain argument expected, got {x!r}")
    return x


def _args_tuple(f, arg):
    args = tuple(arg) if isinstance(arg, (tuple, list)) else (arg,)
    if len(args) != f.arity:
        raise TypeError(f"{f.name} expects {f.arity} argument(s), got {len(args)}")
    return tuple(coerce_arg(f, a) for a in args)


_EVAL, _BINOP, _NEG, _CMP, _BRANCH, _CALL, _RET, _IFDONE = range(8)

_COMPARE = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def _int_binop(op, a, b, steps, depth):
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        if a.bit_length() + b.bit_length() > MAX_INT_BITS:
            raise MagnitudeExceeded("integer product too large", steps, depth)
        return a * b
    if op in ("/", "mod"):
        if b == 0:
            raise DivisionByZero(f"integer {op} by zero", steps, depth)
        return a // b if op == "/" else a % b
    if op == "^":
        if b < 0:
            raise DomainError("negative exponent in the integer domain", steps, depth)
        if abs(a) > 1 and b * a.bit_length() > MAX_INT_BITS:
            raise MagnitudeExceeded("integer power too large", steps, depth)
        return a ** b
    raise ValueError(op)


def _real_binop(op, a, b, bound, steps, depth):
    try:
        if op == "+":
            r = a + b
        elif op == "-":
            r = a - b
        elif op == "*":
            r = a * b
        elif op == "/":
            if b == 0:
                raise DivisionByZero("real division by zero", steps, depth)
            r = a / b
        elif op == "mod":
            if b == 0:
                raise DivisionByZero("real mod by zero", steps, depth)
            r = a % b
        elif op == "^":
            try:
                r = a ** b
            except ZeroDivisionError:
                raise DivisionByZero("zero raised to a negative power", steps, depth) from None
            if isinstance(r, complex):
                raise DomainError("negative base with fractional exponent", steps, depth)
        else:
            raise ValueError(op)
    except OverflowError:
        raise MagnitudeExceeded(f"overflow in {op}", steps, depth) from None
    if not math.isfinite(r) or abs(r) > bound:
        raise MagnitudeExceeded(f"|{r!r}| exceeds magnitude bound {bound!r}", steps, depth)
    return r


def _run(f, arg, budget, trace=False, detail=False, memo=None):
    budget = budget or Budget()
    real = f.domain_tag == REAL
    bound = budget.magnitude_bound
    max_depth_allowed = budget.max_call_depth
    max_steps = budget.max_eval_steps
    params = f.params
    name = f.name
    body = f.body

    steps = 0
    depth = 0
    max_depth = 0
    work = []
    vals = []
    nodes = []      # detail mode: derivation node per value on ``vals``
    frames = []     # trace mode: [args, children] of open calls
    root = []

    def enter(args):
        nonlocal depth, max_depth
        depth += 1
        if depth > max_depth_allowed:
            raise DepthExceeded(f"call depth exceeded {max_depth_allowed}", steps, depth)
        if depth > max_depth:
            max_depth = depth
        if trace and not detail:
            frames.append((args, []))
        work.append((_RET, args))
        work.append((_EVAL, body, dict(zip(params, args))))

    enter(_args_tuple(f, arg))
    while work:
        instr = work.pop()
        code = instr[0]
        if code == _EVAL:
            e, env = instr[1], instr[2]
            steps += 1
            if steps > max_steps:
                raise StepsExceeded(f"more than {max_steps} evaluation steps", steps, depth)
            t = type(e)
            if t is Var:
                v = env[e.name]
                vals.append(v)
                if detail:
                    nodes.append(DerivTree(LeafNode(v), v))
            elif t is IntLit:
                v = float(e.value) if real else e.value
                vals.append(v)
                if detail:
                    nodes.append(DerivTree(LeafNode(v), v))
            elif t is RealLit:
                vals.append(e.value)
                if detail:
                    nodes.append(DerivTree(LeafNode(e.value), e.value))
            elif t is BinOp:
                work.append((_BINOP, e.op))
                work.append((_EVAL, e.rhs, env))
                work.append((_EVAL, e.lhs, env))
            elif t is If:
                work.append((_BRANCH, e.then, e.orelse, env))
                work.append((_EVAL, e.cond, env))
            elif t is Compare:
                work.append((_CMP, e.op))
                work.append((_EVAL, e.rhs, env))
                work.append((_EVAL, e.lhs, env))
            elif t is Call:
                work.append((_CALL, len(e.args)))
                for a in reversed(e.args):
                    work.append((_EVAL, a, env))
            elif t is Neg:
                work.append((_NEG,))
                work.append((_EVAL, e.expr, env))
            else:
                raise TypeError(f"unknown expression node {e!r}")
        elif code == _BINOP:
            b = vals.pop()
            a = vals.pop()
            op = instr[1]
            if real:
                r = _real_binop(op, a, b, bound, steps, depth)
            else:
                r = _int_binop(op, a, b, steps, depth)
            vals.append(r)
            if detail:
                nb = nodes.pop()
                na = nodes.pop()
                nodes.append(DerivTree(OpNode(op), r, (na, nb)))
        elif code == _CMP:
            b = vals.pop()
            a = vals.pop()
            r = _COMPARE[instr[1]](a, b)
            vals.append(r)
            if detail:
                nb = nodes.pop()
                na = nodes.pop()
                nodes.append(DerivTree(OpNode(instr[1]), r, (na, nb)))
        elif code == _BRANCH:
            c = vals.pop()
            if detail:
                work.append((_IFDONE,))
            work.append((_EVAL, instr[1] if c else instr[2], instr[3]))
        elif code == _IFDONE:
            branch = nodes.pop()
            cond = nodes.pop()
            nodes.append(DerivTree(OpNode("if"), branch.result, (cond, branch)))
        elif code == _NEG:
            v = vals.pop()
            r = -v
            vals.append(r)
            if detail:
                nodes.append(DerivTree(OpNode("neg"), r, (nodes.pop(),)))
        elif code == _CALL:
            n = instr[1]
            args = tuple(vals[-n:])
            del vals[-n:]
            if memo is not None and args in memo:
                vals.append(memo[args])
                continue
            if detail:
                arg_nodes = nodes[-n:]
                del nodes[-n:]
                frames.append(arg_nodes)
            enter(args)
        elif code == _RET:
            args = instr[1]
            result = vals[-1]
            depth -= 1
            if memo is not None:
                memo[args] = result
            if detail:
                call = DerivTree(CallNode(name, args), result, (nodes.pop(),))
                if depth == 0:
                    nodes.append(call)
                else:
                    arg_nodes = frames.pop()
                    nodes.append(DerivTree(OpNode("apply"), result, (*arg_nodes, call)))
            elif trace:
                _, children = frames.pop()
                node = DerivTree(CallNode(name, args), result, children)
                if frames:
                    frames[-1][1].append(node)
                else:
                    root.append(node)

    (value,) = vals
    tree = None
    if detail:
        (tree,) = nodes
    elif trace:
        (tree,) = root
    return Evaluation(value=value, steps=steps, max_depth=max_depth, tree=tree)


def evaluate(f, arg, budget=None, *, memoize=False):
    """Evaluate ``f(arg)``; raises an :class:`EvalError` subclass when the budget is exhausted.

    ``memoize=True`` caches call results and is meant only for reference
    timings: step counts then no longer reflect the full unfolding.
    """
    return _run(f, arg, budget, memo={} if memoize else None)


def evaluate_traced(f, arg, budget=None, *, detail=False):
    """Evaluate ``f(arg)`` and return its :class:`DerivTree`.

    By default the tree holds one CallNode per call, children being the
    recursive calls made in the body.  ``detail=True`` records every
    operator and leaf as well.
    """
    return _run(f, arg, budget, trace=True, detail=detail).tree


def run_traced(f, arg, budget=None, *, detail=False):
    """Like :func:`evaluate_traced` but returns the full :class:`Evaluation`."""
    return _run(f, arg, budget, trace=True, detail=detail)
