"""Semantic component: a sampled input-output relation and its descriptive checks."""
from __future__ import annotations

from dataclasses import dataclass, field

from .dsl import REAL
from .evaluator import EvalError, coerce_arg, evaluate


class EmptySample(ValueError):
    pass


@dataclass(frozen=True)
class IntRange:
    """Integers ``lo, lo+step, ...`` up to and including ``hi``."""
    lo: int
    hi: int
    step: int = 1

    def values(self):
        if self.step <= 0:
            raise ValueError("IntRange step must be positive")
        return list(range(self.lo, self.hi + 1, self.step))

    def describe(self):
        return {"kind": "IntRange", "lo": self.lo, "hi": self.hi, "step": self.step}


@dataclass(frozen=True)
class RealGrid:
    """``n_points`` equally spaced reals from ``lo`` to ``hi`` inclusive."""
    lo: float
    hi: float
    n_points: int

    def values(self):
        if self.n_points < 1:
            raise ValueError("RealGrid needs at least one point")
        if self.n_points == 1:
            return [float(self.lo)]
        width = (self.hi - self.lo) / (self.n_points - 1)
        return [self.lo + i * width for i in range(self.n_points - 1)] + [float(self.hi)]

    def describe(self):
        return {"kind": "RealGrid", "lo": self.lo, "hi": self.hi, "n_points": self.n_points}


@dataclass(frozen=True)
class ExplicitList:
    items: tuple

    def values(self):
        seen, out = set(), []
        for v in self.items:
            key = (type(v).__name__, v)
            if key not in seen:
                seen.add(key)
                out.append(v)
        return out

    def describe(self):
        return {"kind": "ExplicitList", "size": len(self.items)}


@dataclass(frozen=True)
class RelationSample:
    """Sampled graph of a function.

    ``pairs`` maps each successfully evaluated x to its unique y, which makes
    the relation functional by construction.
    """
    pairs: dict
    domain_spec: object
    failures: dict = field(default_factory=dict)
    real: bool = False

    def pair_set(self):
        return set(self.pairs.items())

    def __contains__(self, pair):
        x, y = pair
        return x in self.pairs and self.pairs[x] == y


def build_semantic(f, domain_spec, budget=None):
    """Evaluate ``f`` over every point of ``domain_spec``."""
    xs = [coerce_arg(f, x) for x in domain_spec.values()]
    if not xs:
        raise EmptySample("domain sample is empty")
    pairs, failures = {}, {}
    for x in xs:
        try:
            pairs[x] = evaluate(f, x, budget).value
        except EvalError as exc:
            failures[x] = exc
    return RelationSample(pairs=pairs, domain_spec=domain_spec, failures=failures,
                          real=f.domain_tag == REAL)


@dataclass(frozen=True)
class Descriptive:
    injective_on_sample: bool
    surjective_on_sample: bool
    bijective_on_sample: bool
    monotone_on_sample: str  # increasing | decreasing | none
    lipschitz_estimate: float | None = None
    # finite-difference diagnostics, Real samples only; indicative, never verdicts
    max_jump: float | None = None
    max_second_difference: float | None = None

    def as_dict(self):
        return {
            "injective_on_sample": self.injective_on_sample,
            "surjective_on_sample": self.surjective_on_sample,
            "bijective_on_sample": self.bijective_on_sample,
            "monotone_on_sample": self.monotone_on_sample,
            "lipschitz_estimate": self.lipschitz_estimate,
            "max_jump": self.max_jump,
            "max_second_difference": self.max_second_difference,
        }


def descriptive_properties(r):
    """Axis-E style checks restricted to the sample.

    Surjectivity asks whether every sampled x lying between the least and
    greatest observed y is itself attained as a y.
    """
    if not r.pairs:
        raise EmptySample("relation sample has no successful pairs")
    items = sorted(r.pairs.items())
    xs = [x for x, _ in items]
    ys = [y for _, y in items]

    image = set(ys)
    injective = len(image) == len(ys)

    lo, hi = min(ys), max(ys)
    targets = [x for x in xs if lo <= x <= hi]
    surjective = all(t in image for t in targets)

    if len(ys) >= 2 and all(a < b for a, b in zip(ys, ys[1:])):
        monotone = "increasing"
    elif len(ys) >= 2 and all(a > b for a, b in zip(ys, ys[1:])):
        monotone = "decreasing"
    else:
        monotone = "none"

    lipschitz = max_jump = max_second = None
    if r.real and len(xs) >= 2:
        dy = [b - a for a, b in zip(ys, ys[1:])]
        lipschitz = max(abs(d / (b - a)) for d, a, b in zip(dy, xs, xs[1:]))
        max_jump = max(abs(d) for d in dy)
        if len(dy) >= 2:
            max_second = max(abs(b - a) for a, b in zip(dy, dy[1:]))
    return Descriptive(
        injective_on_sample=injective,
        surjective_on_sample=surjective,
        bijective_on_sample=injective and surjective,
        monotone_on_sample=monotone,
        lipschitz_estimate=lipschitz,
        max_jump=max_jump,
        max_second_difference=max_second,
    )
