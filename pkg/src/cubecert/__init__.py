"""Tensor-product cubature on the unit cube with explicit worst-case bounds.

Upper bounds come from product Gauss-Legendre and rectangle rules, lower
bounds from fooling functions that vanish at every node of a given rule.
"""

from ._backend import BACKEND
from .adversary import FoolingFn, PointSet, fooling_eval_mc, read_points_csv
from .bounds import (
    BoundReport,
    Geometry,
    Problem,
    e_lower,
    e_upper,
    favard,
    n_lower,
    n_upper_nonperiodic,
    n_upper_periodic,
    plan,
    reduce_lower_bound,
)
from .quad1d import Rule1D, RuleKind, gauss_legendre, make_rule, midpoint, rectangle_periodic
from .tensor import ProductRule, TooManyNodesError, evaluate, product_rule

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundReport",
    "FoolingFn",
    "Geometry",
    "PointSet",
    "Problem",
    "ProductRule",
    "Rule1D",
    "RuleKind",
    "TooManyNodesError",
    "e_lower",
    "e_upper",
    "evaluate",
    "favard",
    "fooling_eval_mc",
    "gauss_legendre",
    "make_rule",
    "midpoint",
    "n_lower",
    "n_upper_nonperiodic",
    "n_upper_periodic",
    "plan",
    "product_rule",
    "read_points_csv",
    "rectangle_periodic",
    "reduce_lower_bound",
]
