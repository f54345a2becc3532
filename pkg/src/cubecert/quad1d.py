"""Univariate quadrature rules on [0, 1] and their worst-case error constants."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

E_OVER_6SQRT3 = math.e / (6.0 * math.sqrt(3.0))


class RuleKind(str, enum.Enum):
    GAUSS = "gauss"
    MIDPOINT = "midpoint"
    RECTANGLE_PERIODIC = "rectangle_periodic"


@dataclass(frozen=True)
class Rule1D:
    """An m-point positive quadrature rule on [0, 1].

    ``nodes`` and ``weights`` are read-only float arrays. The invariants
    (strictly increasing nodes in [0, 1], positive weights summing to one)
    are checked on construction.
    """

    kind: RuleKind
    m: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=np.float64)
        weights = np.array(self.weights, dtype=np.float64)
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "kind", RuleKind(self.kind))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

        if nodes.shape != (self.m,) or weights.shape != (self.m,):
            raise ValueError(f"expected {self.m} nodes and weights, got {nodes.shape} and {weights.shape}")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if self.kind is RuleKind.GAUSS:
            if nodes[0] <= 0.0 or nodes[-1] >= 1.0:
                raise ValueError("Gauss nodes must lie in the open interval (0, 1)")
        elif nodes[0] < 0.0 or nodes[-1] > 1.0:
            raise ValueError("nodes must lie in [0, 1]")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        if abs(math.fsum(weights) - 1.0) > 1e-14:
            raise ValueError(f"weights sum to {math.fsum(weights)!r}, not 1")

    @property
    def abs_weight_sum(self) -> float:
        """The constant A = sum |a_i| that enters the product-rule error factor."""
        return math.fsum(np.abs(self.weights))

    def __call__(self, f: Callable[[float], float]) -> float:
        return apply_rule(self, f)


def _check_size(m):
    if isinstance(m, bool) or int(m) != m:
        raise TypeError(f"m must be an integer, got {m!r}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return int(m)


def _legendre_with_derivative(m, x):
    """P_m(x) and P_m'(x) by the three-term recurrence."""
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, m + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = m * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


def gauss_legendre(m: int) -> Rule1D:
    """m-point Gauss-Legendre rule mapped to [0, 1]; exact up to degree 2m - 1.

    The roots of P_m are found by Newton's method from the standard
    Chebyshev-type guesses cos(pi (i - 1/4) / (m + 1/2)). Only the roots in
    [0, 1) of the symmetric interval are computed and the others mirrored.
    """
    m = _check_size(m)
    if m == 1:
        return Rule1D(RuleKind.GAUSS, 1, [0.5], [1.0])

    half = (m + 1) // 2
    i = np.arange(1, half + 1)
    x = np.cos(np.pi * (i - 0.25) / (m + 0.5))
    for _ in range(100):
        p, dp = _legendre_with_derivative(m, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    else:  # pragma: no cover
        raise RuntimeError(f"Newton iteration for Gauss-Legendre m={m} did not converge")
    _, dp = _legendre_with_derivative(m, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    # x holds the nonnegative roots in descending order; mirror them
    if m % 2:
        pos, wpos = x[:-1], w[:-1]
        mid_nodes, mid_weights = [0.5], [w[-1]]
    else:
        pos, wpos = x, w
        mid_nodes, mid_weights = [], []
    nodes = np.concatenate([0.5 * (1.0 - pos), mid_nodes, 0.5 * (1.0 + pos[::-1])])
    weights = 0.5 * np.concatenate([wpos, mid_weights, wpos[::-1]])
    weights = weights / math.fsum(weights)
    return Rule1D(RuleKind.GAUSS, m, nodes, weights)


def midpoint(m: int) -> Rule1D:
    """Midpoint rule: nodes (2i - 1) / (2m), equal weights 1/m."""
    m = _check_size(m)
    i = np.arange(1, m + 1)
    return Rule1D(RuleKind.MIDPOINT, m, (2 * i - 1) / (2.0 * m), np.full(m, 1.0 / m))


def rectangle_periodic(m: int) -> Rule1D:
    """Rectangle rule for 1-periodic integrands: nodes i/m, i = 0..m-1."""
    m = _check_size(m)
    return Rule1D(RuleKind.RECTANGLE_PERIODIC, m, np.arange(m) / m, np.full(m, 1.0 / m))


RULES = {
    RuleKind.GAUSS: gauss_legendre,
    RuleKind.MIDPOINT: midpoint,
    RuleKind.RECTANGLE_PERIODIC: rectangle_periodic,
}


def make_rule(kind, m: int) -> Rule1D:
    try:
        builder = RULES[RuleKind(kind)]
    except ValueError:
        raise ValueError(f"unknown rule kind {kind!r}; expected one of {[k.value for k in RuleKind]}") from None
    return builder(m)


def apply_rule(rule: Rule1D, f: Callable[[float], float]) -> float:
    """sum_i a_i f(x_i), accumulated with ``math.fsum``."""
    return math.fsum(float(a) * float(f(float(x))) for a, x in zip(rule.weights, rule.nodes))


def gauss_error_constant(s: int) -> float:
    """Constant c_s = (pi/2) (e / (6 sqrt 3))^s of the m-point Gauss rule on W^s_inf, valid for m > s."""
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    return 0.5 * math.pi * E_OVER_6SQRT3**s


def gauss_bound_terms(m: int, r: int) -> dict[int, float]:
    """c_s m^-s for every admissible smoothness s in 1..r with s <= m - 1."""
    return {s: gauss_error_constant(s) * float(m) ** (-s) for s in range(1, min(r, m - 1) + 1)}


def rule_error_bound_1d(kind, m: int, r: int) -> float:
    """Worst-case error bound of the m-point rule on the C^r unit ball.

    Gauss takes the minimum of c_s m^-s over admissible s; midpoint gives
    1/(4m) (only first derivatives are used); the periodic rectangle rule
    gives 1 / (2 (2 pi)^r m^r).
    """
    kind = RuleKind(kind)
    m = _check_size(m)
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    if kind is RuleKind.MIDPOINT:
        return 1.0 / (4.0 * m)
    if kind is RuleKind.RECTANGLE_PERIODIC:
        return 1.0 / (2.0 * (2.0 * math.pi * m) ** r)
    terms = gauss_bound_terms(m, r)
    if not terms:
        raise ValueError(f"Gauss bound needs m >= 2 (m > s >= 1), got m={m}")
    return min(terms.values())
