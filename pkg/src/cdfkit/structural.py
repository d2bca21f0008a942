"""Syntactic components: iterate orbits and rewrite-system expansion trees."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .dsl import REAL, Symbol
from .evaluator import Budget, EvalError, MagnitudeExceeded, coerce_arg, run_traced, evaluate

CYCLE = "cycle_found"
BUDGET_EXHAUSTED = "budget_exhausted"
DIVERGED = "diverged"
EVAL_FAILED = "eval_failed"

DEFAULT_FLOAT_EPS = 1e-9


def values_close(a, b, float_eps=DEFAULT_FLOAT_EPS):
    """Exact equality for integers, relative epsilon ``|a-b| <= eps*max(1,|a|)`` for reals."""
    if isinstance(a, float) or isinstance(b, float):
        return abs(a - b) <= float_eps * max(1.0, abs(a))
    return a == b


@dataclass(frozen=True)
class Orbit:
    basepoint: object
    points: tuple
    status: str
    tail: int | None = None        # mu
    period: int | None = None      # lambda
    stopped_at: int | None = None  # step index for diverged / eval_failed
    error: EvalError | None = None
    real: bool = False
    # trees[k] derives points[k + 1] from points[k]; empty unless traced
    trees: tuple = field(default=(), repr=False)

    @property
    def cycle_found(self):
        return self.status == CYCLE

    @property
    def steps(self):
        return len(self.points) - 1


def build_orbit(f, x0, max_steps=10_000, float_eps=DEFAULT_FLOAT_EPS, budget=None, *,
                trace=False, detail=False):
    """Iterate ``f`` from ``x0`` with Brent's cycle detection.

    Each Brent iteration advances the hare by exactly one new point, so the
    stored prefix for a smaller ``max_steps`` is always a prefix of the one
    for a larger ``max_steps``.
    """
    if f.arity != 1:
        raise ValueError("orbits need a unary function")
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    if not float_eps > 0:
        raise ValueError("float_eps must be positive")
    budget = budget or Budget()
    real = f.domain_tag == REAL
    x0 = coerce_arg(f, x0)
    points = [x0]
    trees = []
    stop = {}

    def same(a, b):
        return values_close(a, b, float_eps) if real else a == b

    def advance():
        k = len(points)
        if k > max_steps:
            stop.update(status=BUDGET_EXHAUSTED)
            return False
        try:
            if trace:
                ev = run_traced(f, points[-1], budget, detail=detail)
                trees.append(ev.tree)
            else:
                ev = evaluate(f, points[-1], budget)
        except MagnitudeExceeded as exc:
            if real:
                stop.update(status=DIVERGED, stopped_at=k, error=exc)
            else:
                stop.update(status=EVAL_FAILED, stopped_at=k, error=exc)
            return False
        except EvalError as exc:
            stop.update(status=EVAL_FAILED, stopped_at=k, error=exc)
            return False
        y = ev.value
        points.append(y)
        if real and (not math.isfinite(y) or abs(y) > budget.magnitude_bound):
            stop.update(status=DIVERGED, stopped_at=k)
            return False
        return True

    def finish(**kw):
        return Orbit(basepoint=x0, points=tuple(points), real=real, trees=tuple(trees), **kw)

    if not advance():
        return finish(**stop)
    power = lam = 1
    tortoise, hare = 0, 1
    while not same(points[tortoise], points[hare]):
        if power == lam:
            tortoise = hare
            power *= 2
            lam = 0
        if not advance():
            return finish(**stop)
        hare += 1
        lam += 1

    mu = _replay_tail(points, lam, same)
    if real:
        # epsilon-equality is not transitive; shrink to the least period seen at mu
        for shorter in range(1, lam):
            if same(points[mu], points[mu + shorter]):
                lam = shorter
                mu = _replay_tail(points, lam, same)
                break
    return finish(status=CYCLE, tail=mu, period=lam)


def _replay_tail(points, lam, same):
    mu = 0
    while not same(points[mu], points[mu + lam]):
        mu += 1
    return mu


def detect_cycle_bruteforce(points, float_eps=DEFAULT_FLOAT_EPS):
    """Exhaustive pairwise search for the first repeat; returns ``(mu, lam)`` or ``None``.

    Independent of :func:`build_orbit`: the first index ``j`` equal to some
    earlier point closes the cycle, and the latest such earlier ``i`` gives
    the least period.
    """
    for j in range(1, len(points)):
        for i in range(j - 1, -1, -1):
            if values_close(points[i], points[j], float_eps):
                return i, j - i
    return None


# ---------------------------------------------------------------------------
# Expansion trees
# ---------------------------------------------------------------------------

NO_CAP = "none"
DEPTH_CAP = "depth_cap"
NODE_CAP = "node_cap"


@dataclass(eq=False)
class ExpansionNode:
    form: tuple                     # sentential form, tuple of Symbol
    depth: int
    rule: tuple | None = None       # (nonterminal, alternative index) that produced this form
    children: list = field(default_factory=list)
    truncated: bool = False

    @property
    def is_terminal(self):
        return all(s.terminal for s in self.form)

    @property
    def text(self):
        if not self.form:
            return "ε"
        return " ".join(str(s) for s in self.form)

    def iter_preorder(self):
        stack = [self]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(n.children))


@dataclass(eq=False)
class ExpansionTree:
    root: ExpansionNode
    caps_hit: str
    depth_cap: int
    node_cap: int

    def nodes(self):
        return self.root.iter_preorder()

    @property
    def node_count(self):
        return sum(1 for _ in self.nodes())

    @property
    def depth(self):
        return max(n.depth for n in self.nodes())

    @property
    def max_branching(self):
        return max(len(n.children) for n in self.nodes())

    def leaves(self):
        return [n for n in self.nodes() if not n.children]

    def signature(self):
        """Hashable preorder rendering, for determinism checks."""
        return tuple((n.depth, n.rule, n.form, len(n.children), n.truncated) for n in self.nodes())


def build_expansion(g, depth_cap=50, node_cap=100_000):
    """Breadth-first leftmost-nonterminal expansion of ``g`` from its start symbol.

    The root has depth 1.  A node at ``depth_cap`` that still holds a
    nonterminal is left truncated; once expanding a node would push the node
    count past ``node_cap`` expansion stops altogether.
    """
    if depth_cap < 1 or node_cap < 1:
        raise ValueError("caps must be at least 1")
    root = ExpansionNode(form=(Symbol(g.start_symbol, False),), depth=1)
    count = 1
    queue = deque([root])
    depth_hit = node_hit = False
    while queue:
        node = queue.popleft()
        idx = next((i for i, s in enumerate(node.form) if not s.terminal), None)
        if idx is None:
            continue
        if node.depth >= depth_cap:
            node.truncated = True
            depth_hit = True
            continue
        nonterminal = node.form[idx].text
        alts = g.rules[nonterminal]
        if count + len(alts) > node_cap:
            node.truncated = True
            node_hit = True
            for rest in queue:
                if not rest.is_terminal:
                    rest.truncated = True
            break
        for k, alt in enumerate(alts):
            child = ExpansionNode(
                form=node.form[:idx] + tuple(alt) + node.form[idx + 1:],
                depth=node.depth + 1,
                rule=(nonterminal, k),
            )
            node.children.append(child)
            queue.append(child)
        count += len(alts)
    caps_hit = NODE_CAP if node_hit else DEPTH_CAP if depth_hit else NO_CAP
    return ExpansionTree(root=root, caps_hit=caps_hit, depth_cap=depth_cap, node_cap=node_cap)


@dataclass(frozen=True)
class Recursion:
    recursive: bool
    witnesses: tuple


def rule_graph(g):
    return {
        lhs: sorted({s.text for alt in alts for s in alt if not s.terminal}, key=list(g.rules).index)
        for lhs, alts in g.rules.items()
    }


def is_recursive(g):
    """Nonterminals reachable from the start symbol that can reach themselves."""
    graph = rule_graph(g)
    order = list(g.rules)

    def reach(src):
        seen = set()
        stack = list(graph[src])
        while stack:
            n = stack.pop()
            if n not in seen:
                seen.add(n)
                stack.extend(graph[n])
        return seen

    live = reach(g.start_symbol) | {g.start_symbol}
    witnesses = tuple(n for n in order if n in live and n in reach(n))
    return Recursion(bool(witnesses), witnesses)
