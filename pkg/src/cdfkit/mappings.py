"""The structural space of a function and the maps between its components.

For an orbit ``x0, f(x0), f^2(x0), ...``:

* ``alpha(n)`` is the relation pair ``(f^(n-1)(x0), f^n(x0))``;
* ``beta((x, y))`` is a freshly traced derivation of ``y`` from ``x``;
* ``gamma(n)`` is the derivation recorded while the orbit was built.

The square commutes when ``gamma(n)`` and ``beta(alpha(n))`` are identical
ordered labelled trees.  ``n = 0`` is rejected by all three maps.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field

from .dsl import FunctionDef, RewriteSystem
from .evaluator import Budget, CallNode, EvalError, coerce_arg, evaluate, run_traced, trees_equal
from .semantic import ExplicitList, build_semantic
from .structural import DEFAULT_FLOAT_EPS, build_expansion, build_orbit


class MappingError(Exception):
    pass


class IndexOutOfRange(MappingError, IndexError):
    pass


class UndefinedAtZero(MappingError, ValueError):
    pass


class PairNotInRelation(MappingError, ValueError):
    pass


class ComponentMissing(MappingError, LookupError):
    pass


@dataclass(eq=False)
class CdfSpace:
    function: FunctionDef | RewriteSystem
    basepoint: object = None
    orbit: object = None            # structural.Orbit
    expansion: object = None        # structural.ExpansionTree
    call_chain: tuple | None = None  # distinct call arguments of T(x0), preorder
    basepoint_tree: object = None   # T(x0) when f is recursive
    semantic: object = None         # semantic.RelationSample
    logical: tuple = ()             # logical[k] derives orbit.points[k+1] from orbit.points[k]
    budget: Budget = field(default_factory=Budget)
    detail: bool = False
    _beta_cache: dict = field(default_factory=dict, repr=False)
    _beta_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def is_rewrite(self):
        return isinstance(self.function, RewriteSystem)

    @property
    def trees(self):
        """Every materialised derivation tree."""
        out = list(self.logical)
        if self.basepoint_tree is not None:
            out.append(self.basepoint_tree)
        return out


def _call_chain(tree):
    seen, chain = set(), []
    for t in tree.iter_preorder():
        if isinstance(t.node, CallNode):
            key = (type(t.node.arg).__name__, t.node.arg)
            if key not in seen:
                seen.add(key)
                chain.append(t.node.arg)
    return tuple(chain)


def build_space(f, x0, *, max_steps=10_000, float_eps=DEFAULT_FLOAT_EPS, budget=None,
                domain_spec=None, detail=False):
    """Lift a unary :class:`FunctionDef` into its structural space from basepoint ``x0``.

    The default semantic sample is the call chain of ``T(x0)`` for recursive
    functions and the orbit points otherwise.
    """
    budget = budget or Budget()
    x0 = coerce_arg(f, x0)
    orbit = build_orbit(f, x0, max_steps, float_eps, budget, trace=True, detail=detail)
    call_chain = basepoint_tree = None
    if f.is_recursive:
        if orbit.trees:
            basepoint_tree = orbit.trees[0]
        else:
            try:
                basepoint_tree = run_traced(f, x0, budget, detail=detail).tree
            except EvalError:
                basepoint_tree = None
        call_chain = _call_chain(basepoint_tree) if basepoint_tree is not None else (x0,)
    if domain_spec is None:
        domain_spec = ExplicitList(call_chain if call_chain is not None else orbit.points)
    semantic = build_semantic(f, domain_spec, budget)
    return CdfSpace(
        function=f,
        basepoint=x0,
        orbit=orbit,
        call_chain=call_chain,
        basepoint_tree=basepoint_tree,
        semantic=semantic,
        logical=orbit.trees,
        budget=budget,
        detail=detail,
    )


def build_rewrite_space(g, *, depth_cap=50, node_cap=100_000):
    return CdfSpace(function=g, expansion=build_expansion(g, depth_cap, node_cap))


def _orbit_index(space, n):
    if space.orbit is None:
        raise ComponentMissing("space has no orbit")
    if n == 0:
        raise UndefinedAtZero("the maps reference f^(n-1)(x0); n = 0 is undefined")
    if n < 0 or n >= len(space.orbit.points):
        raise IndexOutOfRange(f"n={n} outside 1..{len(space.orbit.points) - 1}")


def alpha(space, n):
    _orbit_index(space, n)
    pts = space.orbit.points
    return pts[n - 1], pts[n]


def gamma(space, n):
    _orbit_index(space, n)
    if n > len(space.logical):
        raise IndexOutOfRange(f"no derivation recorded for n={n}")
    return space.logical[n - 1]


def beta(space, pair):
    """Derivation tree for a relation pair, traced on demand and cached by x."""
    if not isinstance(space.function, FunctionDef):
        raise ComponentMissing("beta needs a function-backed space")
    f = space.function
    x, y = pair
    x = coerce_arg(f, x)
    sem = space.semantic
    if sem is not None and x in sem.failures:
        raise PairNotInRelation(f"f({x!r}) is undefined within budget")
    if sem is not None and x in sem.pairs:
        expected = sem.pairs[x]
    else:
        try:
            expected = evaluate(f, x, space.budget).value
        except EvalError as exc:
            raise PairNotInRelation(f"f({x!r}) is undefined within budget: {exc}") from exc
    if type(expected) is not type(y) or expected != y:
        raise PairNotInRelation(f"f({x!r}) = {expected!r}, not {y!r}")
    key = (type(x).__name__, x)
    with space._beta_lock:
        tree = space._beta_cache.get(key)
    if tree is None:
        tree = run_traced(f, x, space.budget, detail=space.detail).tree
        with space._beta_lock:
            tree = space._beta_cache.setdefault(key, tree)
    return tree


def call_subtree(space, x):
    """The subtree of ``T(x0)`` rooted at the first call with argument ``x``."""
    if space.basepoint_tree is None:
        raise ComponentMissing("space has no call-chain tree")
    for t in space.basepoint_tree.iter_preorder():
        if isinstance(t.node, CallNode) and type(t.node.arg) is type(x) and t.node.arg == x:
            return t
    raise IndexOutOfRange(f"no call with argument {x!r} in T(x0)")


@dataclass(frozen=True)
class Commutativity:
    holds: bool
    first_failure: int | None = None
    failure_component: str | None = None  # "orbit" | "call-chain"
    checked: int = 0
    applicable: bool = True

    def as_dict(self):
        return {
            "applicable": self.applicable,
            "holds": self.holds,
            "first_failure": self.first_failure,
            "failure_component": self.failure_component,
            "checked": self.checked,
        }


def check_commutativity(space):
    """Compare ``gamma(n)`` with ``beta(alpha(n))`` at every valid n.

    For recursive functions each call-chain entry is checked too: the
    subtree of ``T(x0)`` at that call must equal an independent trace.
    """
    if space.orbit is None:
        return Commutativity(holds=False, applicable=False)
    checked = 0
    for n in range(1, len(space.logical) + 1):
        checked += 1
        try:
            ok = trees_equal(gamma(space, n), beta(space, alpha(space, n)))
        except MappingError:
            ok = False
        if not ok:
            return Commutativity(False, n, "orbit", checked)
    if space.call_chain is not None and space.basepoint_tree is not None:
        for i, x in enumerate(space.call_chain):
            checked += 1
            sub = call_subtree(space, x)
            try:
                ok = trees_equal(sub, beta(space, (x, sub.result)))
            except MappingError:
                ok = False
            if not ok:
                return Commutativity(False, i, "call-chain", checked)
    return Commutativity(True, None, None, checked)
