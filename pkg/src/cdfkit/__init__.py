"""Structural spaces generated by functions: orbits, relations and derivation trees."""

__version__ = "0.1.0"

from .dsl import FunctionDef, RewriteSystem, parse_function, parse_rewrite_system  # noqa: E402
from .evaluator import Budget, DerivTree, evaluate, evaluate_traced, tree_metrics  # noqa: E402
from .mappings import CdfSpace, alpha, beta, build_rewrite_space, build_space, check_commutativity, gamma  # noqa: E402
from .classify import ClassifyConfig, CdfReport, classify  # noqa: E402

__all__ = [
    "Budget", "CdfReport", "CdfSpace", "ClassifyConfig", "DerivTree", "FunctionDef",
    "RewriteSystem", "alpha", "beta", "build_rewrite_space", "build_space",
    "check_commutativity", "classify", "evaluate", "evaluate_traced", "gamma",
    "parse_function", "parse_rewrite_system", "tree_metrics",
]
