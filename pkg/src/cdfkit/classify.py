"""Metric extraction and classification of a structural space.

Every numeric cutoff here is a tunable in :class:`ClassifyConfig`; none of
them is canonical.  The logic tags are heuristic proxies, not model theory.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dsl import INTEGER, REAL, FunctionDef, If, walk
from .evaluator import Budget, EvalError, coerce_arg, evaluate, tree_metrics
from .semantic import EmptySample, descriptive_properties
from .structural import BUDGET_EXHAUSTED, CYCLE, DIVERGED, NO_CAP, is_recursive

# axis A
LINEAR = "Linear"
CYCLIC = "Cyclic"
BRANCHING = "Branching"
FIXED_POINT = "FixedPoint"
UNRESOLVED = "Unresolved"

# axis B
CLOSED_PERIODIC = "ClosedPeriodic"
RECURSIVE_EXPANSION = "RecursiveExpansion"
INFINITE_BRANCHING = "InfiniteBranching"
DIVERGENT = "Divergent"
CHAOTIC = "Chaotic"

# axis D growth classes
CONSTANT = "Constant"
POLYNOMIAL = "Polynomial"
EXPONENTIAL = "Exponential"

NOT_ASSESSED = "NotAssessed"

STABLE_LIKE = "StableLike"
TREE_LIKE = "TreeLike"
HEURISTIC_LABEL = "heuristic proxy - not model theory"

NOT_ASSESSED_ROWS = (
    "C: stability, simplicity, NIP, TP1/TP2 (no decision procedure; heuristic tags only)",
    "D: computable vs non-computable (approximated by halting within budget)",
    "E: integrability",
    "E: analyticity",
    "E: algebraic vs transcendental",
    "hierarchy levels 3-4",
)


@dataclass(frozen=True)
class ClassifyConfig:
    lyapunov_threshold: float = 0.01
    n_transient: int = 1000
    n_sample: int = 10_000
    fd_step: float = 1e-7
    probes: tuple = tuple(range(1, 11))
    growth_gap: float = 0.10

    def echo(self):
        return {
            "lyapunov_threshold": self.lyapunov_threshold,
            "n_transient": self.n_transient,
            "n_sample": self.n_sample,
            "fd_step": self.fd_step,
            "probes": list(self.probes),
            "growth_gap": self.growth_gap,
        }


@dataclass(frozen=True)
class Tag:
    tag: str
    justification: str


@dataclass
class CdfReport:
    shape: str | None = None
    expandability: str | None = None
    lyapunov: float | None = None
    growth: "GrowthFit | None" = None
    hierarchy_level: object = NOT_ASSESSED
    descriptive: dict | None = None
    heuristic_logic_tags: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    not_assessed: list = field(default_factory=lambda: list(NOT_ASSESSED_ROWS))
    metrics: dict = field(default_factory=dict)

    @property
    def growth_class(self):
        return self.growth.growth_class if self.growth else UNRESOLVED

    @property
    def growth_label(self):
        """``Polynomial(d)`` carries its degree; other classes are bare names."""
        return self.growth.label if self.growth else UNRESOLVED


# ---------------------------------------------------------------------------
# Lyapunov exponent
# ---------------------------------------------------------------------------

class LyapunovError(ArithmeticError):
    pass


class DerivativeUndefined(LyapunovError):
    pass


class OrbitEscaped(LyapunovError):
    pass


def estimate_lyapunov(f, x0, n_transient=1000, n_sample=10_000, fd_step=1e-7, budget=None):
    """Mean of ``ln|f'(x_k)|`` over the post-transient orbit, central differences for f'.

    Returns ``-inf`` as soon as a derivative vanishes exactly.
    """
    if f.domain_tag != REAL or f.arity != 1:
        raise ValueError("Lyapunov estimation needs a unary Real-domain function")
    if n_sample < 1 or n_transient < 0 or not fd_step > 0:
        raise ValueError("bad Lyapunov parameters")
    budget = budget or Budget()
    bound = budget.magnitude_bound

    def step(x):
        try:
            y = evaluate(f, x, budget).value
        except EvalError as exc:
            raise OrbitEscaped(f"orbit left the evaluable region at x={x!r}: {exc}") from exc
        if not math.isfinite(y) or abs(y) > bound:
            raise OrbitEscaped(f"orbit escaped to {y!r}")
        return y

    x = coerce_arg(f, x0)
    for _ in range(n_transient):
        x = step(x)
    total = 0.0
    h2 = 2.0 * fd_step
    for _ in range(n_sample):
        try:
            d = (evaluate(f, x + fd_step, budget).value - evaluate(f, x - fd_step, budget).value) / h2
        except EvalError as exc:
            raise DerivativeUndefined(f"f undefined near x={x!r}: {exc}") from exc
        if not math.isfinite(d) or abs(d) > bound:
            raise DerivativeUndefined(f"derivative estimate {d!r} at x={x!r} exceeds bound")
        if d == 0.0:
            return float("-inf")
        total += math.log(abs(d))
        x = step(x)
    return total / n_sample


# ---------------------------------------------------------------------------
# Growth class of step counts
# ---------------------------------------------------------------------------

class InsufficientProbes(ValueError):
    pass


class AllProbesFailed(ValueError):
    pass


@dataclass(frozen=True)
class GrowthFit:
    growth_class: str
    degree: int | None = None
    raw_exponent: float | None = None
    base: float | None = None
    scores: dict = field(default_factory=dict)
    steps: tuple = ()         # (probe, step count or None)
    memoized: bool = False

    @property
    def label(self):
        if self.growth_class == POLYNOMIAL:
            return f"{POLYNOMIAL}({self.degree})"
        return self.growth_class

    def as_dict(self):
        return {
            "growth_class": self.growth_class,
            "degree": self.degree,
            "raw_exponent": self.raw_exponent,
            "base": self.base,
            "scores": dict(self.scores),
            "memoized": self.memoized,
        }


def step_counts(f, probes, budget=None, memoize=False):
    out = []
    for n in probes:
        try:
            out.append((n, evaluate(f, n, budget, memoize=memoize).steps))
        except EvalError:
            out.append((n, None))
    return out


def _log_rms(s, pred):
    pred = np.asarray(pred, dtype=float)
    if not np.all(np.isfinite(pred)) or np.any(pred <= 0):
        return math.inf
    return float(np.sqrt(np.mean((np.log(s) - np.log(pred)) ** 2)))


def fit_growth_class(f, probe_inputs, budget=None, *, gap=0.10, memoize=False):
    """Fit step counts s(n) against constant, affine, power-law and exponential models.

    Power laws are fitted on ``ln s`` vs ``ln n`` and exponentials on ``ln s``
    vs ``n``; all models are then scored by RMS error in log space.  When the
    runner-up is within ``gap`` (relative) of the best the class is
    Unresolved.  ``memoize=True`` gives memoized reference counts.
    """
    if f.domain_tag != INTEGER:
        raise ValueError("growth fitting needs an Integer-domain function")
    probes = [coerce_arg(f, p) for p in probe_inputs]
    if len(probes) < 4:
        raise InsufficientProbes("need at least 4 probe inputs")
    if any(b <= a for a, b in zip(probes, probes[1:])):
        raise ValueError("probe inputs must be strictly increasing")
    counts = step_counts(f, probes, budget, memoize)
    ok = [(n, s) for n, s in counts if s is not None]
    if not ok:
        raise AllProbesFailed("no probe evaluated within budget")
    if len(ok) < 4:
        return GrowthFit(UNRESOLVED, steps=tuple(counts), memoized=memoize)
    n = np.array([p for p, _ in ok], dtype=float)
    s = np.array([c for _, c in ok], dtype=float)
    if np.all(s == s[0]):
        return GrowthFit(CONSTANT, degree=0, raw_exponent=0.0, steps=tuple(counts),
                         scores={CONSTANT: 0.0}, memoized=memoize)

    scores = {}
    scores[CONSTANT] = _log_rms(s, np.full_like(s, math.exp(np.mean(np.log(s)))))
    a, b = np.polyfit(n, s, 1)
    scores[LINEAR] = _log_rms(s, a * n + b)
    exponent = None
    if np.all(n > 0):
        exponent, log_a = np.polyfit(np.log(n), np.log(s), 1)
        scores[POLYNOMIAL] = _log_rms(s, np.exp(log_a + exponent * np.log(n)))
    else:
        scores[POLYNOMIAL] = math.inf
    log_base, log_c = np.polyfit(n, np.log(s), 1)
    scores[EXPONENTIAL] = _log_rms(s, np.exp(log_c + log_base * n))

    ranked = sorted(scores.items(), key=lambda kv: kv[1])
    (best, r1), (_, r2) = ranked[0], ranked[1]
    scores = {k: round(v, 12) for k, v in scores.items()}
    common = dict(scores=scores, steps=tuple(counts), memoized=memoize,
                  raw_exponent=None if exponent is None else round(float(exponent), 12),
                  base=round(float(math.exp(log_base)), 12))
    if math.isfinite(r2) and r2 > 0 and (r2 - r1) / r2 < gap:
        return GrowthFit(UNRESOLVED, **common)
    if best == POLYNOMIAL:
        degree = int(round(exponent))
        if degree <= 0:
            return GrowthFit(CONSTANT, degree=0, **common)
        if degree == 1:
            return GrowthFit(LINEAR, degree=1, **common)
        return GrowthFit(POLYNOMIAL, degree=degree, **common)
    if best == LINEAR:
        return GrowthFit(LINEAR, degree=1, **common)
    if best == CONSTANT:
        return GrowthFit(CONSTANT, degree=0, **common)
    return GrowthFit(EXPONENTIAL, **common)


# ---------------------------------------------------------------------------
# Axis classifiers
# ---------------------------------------------------------------------------

def max_branching(space):
    best = 0
    if space.expansion is not None:
        best = space.expansion.max_branching
    for t in space.trees:
        best = max(best, tree_metrics(t).max_branching)
    return best


def classify_shape(space):
    """Branching dominates; otherwise the orbit decides."""
    if space.expansion is not None or max_branching(space) >= 2:
        return BRANCHING
    orbit = space.orbit
    if orbit is None:
        return UNRESOLVED
    if orbit.status == CYCLE:
        return FIXED_POINT if orbit.period == 1 else CYCLIC
    pts = orbit.points
    if len(pts) >= 2 and (all(a < b for a, b in zip(pts, pts[1:]))
                          or all(a > b for a, b in zip(pts, pts[1:]))):
        return LINEAR
    return UNRESOLVED


def call_depth_profile(f, probes, budget=None):
    out = []
    for p in probes:
        try:
            out.append((p, evaluate(f, coerce_arg(f, p), budget).max_depth))
        except EvalError:
            out.append((p, None))
    return out


def _unbounded_depth(profile):
    depths = [d for _, d in profile if d is not None]
    if len(depths) < 3:
        return False
    monotone = all(a <= b for a, b in zip(depths, depths[1:]))
    return monotone and depths[-1] > depths[len(depths) // 2]


_UNSET = object()


def classify_expandability(space, lyapunov_threshold=0.01, *, lyapunov=_UNSET,
                           depth_profile=None, config=None):
    """Decision order: cycle, divergence, Lyapunov, rewrite recursion, call-depth growth."""
    config = config or ClassifyConfig(lyapunov_threshold=lyapunov_threshold)
    orbit = space.orbit
    if orbit is not None and orbit.status == CYCLE:
        return CLOSED_PERIODIC
    if orbit is not None and orbit.status == DIVERGED:
        return DIVERGENT
    f = space.function
    if isinstance(f, FunctionDef) and f.domain_tag == REAL and f.arity == 1:
        if lyapunov is _UNSET:
            try:
                lyapunov = estimate_lyapunov(f, space.basepoint, config.n_transient,
                                             config.n_sample, config.fd_step, space.budget)
            except LyapunovError:
                lyapunov = None
        if lyapunov is not None and lyapunov > lyapunov_threshold:
            return CHAOTIC
    if space.is_rewrite:
        if is_recursive(f).recursive:
            return INFINITE_BRANCHING
        if space.expansion.caps_hit == NO_CAP:
            return CLOSED_PERIODIC
        return UNRESOLVED
    if f.is_recursive:
        if depth_profile is None:
            depth_profile = call_depth_profile(f, config.probes, space.budget)
        if _unbounded_depth(depth_profile):
            return RECURSIVE_EXPANSION
    return UNRESOLVED


def assign_hierarchy_level(report, space, depth_profile=None):
    """Level 0, then 2, then 1; anything else is NotAssessed."""
    branching = max_branching(space)
    if report.shape in (LINEAR, CYCLIC, FIXED_POINT) and branching <= 1:
        return 0
    if report.expandability in (INFINITE_BRANCHING, RECURSIVE_EXPANSION):
        return 2
    if report.shape == BRANCHING:
        if space.is_rewrite:
            if not is_recursive(space.function).recursive:
                return 1
        else:
            trees_ok = bool(space.trees)
            probes_ok = depth_profile is not None and all(d is not None for _, d in depth_profile)
            if trees_ok and probes_ok:
                return 1
    return NOT_ASSESSED


def heuristic_logic_tags(report, branching=None):
    if report.shape is None:
        return []
    branching = report.metrics.get("max_branching", 0) if branching is None else branching
    tags = []
    if report.shape in (LINEAR, CYCLIC, FIXED_POINT) and report.hierarchy_level == 0:
        tags.append(Tag(STABLE_LIKE,
                        f"shape={report.shape}, hierarchy_level=0, max_branching={branching}"))
    if report.hierarchy_level == 2 or branching >= 2:
        tags.append(Tag(TREE_LIKE,
                        f"hierarchy_level={report.hierarchy_level}, max_branching={branching}"))
    return tags


# ---------------------------------------------------------------------------
# Whole-space classification
# ---------------------------------------------------------------------------

def classify(space, config=None):
    config = config or ClassifyConfig()
    report = CdfReport()
    f = space.function
    branching = max_branching(space)
    metrics = {"max_branching": branching}
    depth_profile = None

    if space.is_rewrite:
        rec = is_recursive(f)
        exp = space.expansion
        metrics.update(recursive=rec.recursive, recursion_witnesses=list(rec.witnesses),
                       expansion_nodes=exp.node_count, expansion_depth=exp.depth,
                       caps_hit=exp.caps_hit)
        report.notes.append("semantic and logical components of rewrite systems are not materialised")
    else:
        metrics["self_recursive"] = f.is_recursive
        if space.trees:
            tm = [tree_metrics(t) for t in space.trees]
            metrics["max_tree_depth"] = max(m.depth for m in tm)
            metrics["all_trees_chains"] = all(m.max_branching <= 1 for m in tm)
        if f.is_recursive:
            depth_profile = call_depth_profile(f, config.probes, space.budget)
            metrics["call_depth_profile"] = [[p, d] for p, d in depth_profile]
        if f.domain_tag == REAL and f.arity == 1:
            try:
                report.lyapunov = estimate_lyapunov(f, space.basepoint, config.n_transient,
                                                    config.n_sample, config.fd_step, space.budget)
                if any(isinstance(e, If) for e in walk(f.body)):
                    report.notes.append("Lyapunov exponent from finite differences across "
                                        "conditionals; kinks may bias the estimate")
            except LyapunovError as exc:
                report.notes.append(f"Lyapunov exponent not available: {exc}")
        if f.domain_tag == INTEGER:
            try:
                report.growth = fit_growth_class(f, config.probes, space.budget,
                                                 gap=config.growth_gap)
                metrics["step_counts"] = [[p, s] for p, s in report.growth.steps]
            except (ValueError, TypeError) as exc:
                report.notes.append(f"growth class not fitted: {exc}")
        else:
            report.notes.append("growth class is fitted for Integer-domain functions only")
        if space.semantic is not None:
            try:
                report.descriptive = descriptive_properties(space.semantic).as_dict()
            except EmptySample:
                report.notes.append("descriptive properties skipped: empty sample")
        orbit = space.orbit
        if orbit is not None and orbit.real and orbit.status == CYCLE:
            report.notes.append("cycle detected up to relative tolerance (epsilon-cycle)")
        if orbit is not None and orbit.status == BUDGET_EXHAUSTED:
            report.notes.append("orbit budget exhausted without a cycle")
        if f.is_recursive:
            report.notes.append(
                "alpha pairs orbit neighbours (f^(n-1)(x0), f^n(x0)); indexings that pair a "
                "call argument with its caller's value, such as (2, 6) for factorial from 3, "
                "are not reproduced; call-chain subtrees are checked separately")
        report.notes.append("descriptive flags are sample-relative; continuity diagnostics "
                            "are indicative only")

    report.metrics = metrics
    report.shape = classify_shape(space)
    report.expandability = classify_expandability(
        space, config.lyapunov_threshold, lyapunov=report.lyapunov,
        depth_profile=depth_profile, config=config)
    report.hierarchy_level = assign_hierarchy_level(report, space, depth_profile)
    report.heuristic_logic_tags = heuristic_logic_tags(report, branching)
    if report.heuristic_logic_tags:
        report.notes.append(f"logic tags are a {HEURISTIC_LABEL}")
    return report
