"""Explicit lower and upper bounds for integration on the C^r unit ball.

Counts n are returned as exact Python integers; lower-bound formulas are
evaluated in log space and exponentiated once at the end.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

from .quad1d import gauss_error_constant

# Stable formula identifiers used in reports and CSV output.
THM3 = "thm3"  # lower bound, arbitrary open domain / cube, 6-constant
PROP1 = "prop1"  # periodic lower bound, 4-constant
PROP2 = "prop2"  # periodic upper bound, rectangle product rule
THM4 = "thm4"  # nonperiodic upper bound, Gauss product rule
EQ_DD = "eq-dd"  # THM3 at the optimal delta = d/(d+r)
EQ_PER1 = "eq-per1"  # PROP1 at delta = d/(d+r) together with PROP2
EQ_NONPER2 = "eq-nonper2"  # THM4 written as min over s

FORMULA_IDS = (THM3, PROP1, PROP2, THM4, EQ_DD, EQ_PER1, EQ_NONPER2)


class Geometry(str, enum.Enum):
    CUBE_NONPERIODIC = "cube_nonperiodic"
    PERIODIC = "periodic"
    GENERAL_DOMAIN = "general_domain"


class Problem(str, enum.Enum):
    INT = "INT"
    APP = "APP"
    OPT = "OPT"


def _positive_int(name, v):
    if isinstance(v, bool) or int(v) != v or v < 1:
        raise ValueError(f"{name} must be a positive integer, got {v!r}")
    return int(v)


def _check_eps(eps):
    if not 0.0 < eps < 1.0:
        raise ValueError(f"epsilon must lie in (0,1), got {eps!r}")
    return float(eps)


@dataclass(frozen=True)
class ClassSpec:
    """Smoothness class C^r on [0,1]^d, or its 1-periodic subclass."""

    r: int
    d: int
    periodic: bool = False

    def __post_init__(self):
        _positive_int("r", self.r)
        _positive_int("d", self.d)


class NonperiodicPlan(NamedTuple):
    n: int
    s_star: int
    m: int


class PeriodicPlan(NamedTuple):
    n: int
    m: int


# ---------------------------------------------------------------------------
# Favard constants


def _series_derivative(order, p, x):
    """order-th derivative of t -> (2t + 1)^-p at x."""
    c = float((-2) ** order)
    for i in range(order):
        c *= p + i
    return c * (2.0 * x + 1.0) ** (-p - order)


def favard_series(s: int, terms: int = 64) -> tuple[float, float]:
    """Favard constant K_s and a bound on its truncation error.

    The first ``terms`` summands of 4/pi sum_k (-1)^{k(s+1)} (2k+1)^{-(s+1)}
    are added exactly; the tail is replaced by its Euler-Maclaurin expansion
    (s odd, positive terms) or Boole expansion (s even, alternating terms)
    through the fifth derivative. The summand is completely monotone, so the
    first omitted term bounds the remainder; a floating-point rounding
    allowance for the head is added on top.
    """
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    terms = _positive_int("terms", terms)
    p = s + 1
    N = terms
    alternating = p % 2 == 1
    head = math.fsum(
        (-1.0 if alternating and k % 2 else 1.0) * (2.0 * k + 1.0) ** (-p) for k in range(N)
    )

    def f(order):
        return _series_derivative(order, p, N)

    if alternating:
        tail = f(0) / 2 - f(1) / 4 + f(3) / 48 - f(5) / 480
        tail *= -1.0 if N % 2 else 1.0
        err = 17.0 * abs(f(7)) / 80640.0
    else:
        integral = (2.0 * N + 1.0) ** (1 - p) / (2.0 * (p - 1))
        tail = integral + f(0) / 2 - f(1) / 12 + f(3) / 720 - f(5) / 30240
        err = abs(f(7)) / 1209600.0
    # rounding of the N summands and of the fsum result
    err += (N + 2) * 2.0**-52 * max(1.0, abs(head))
    scale = 4.0 / math.pi
    return scale * (head + tail), scale * err


def favard(s: int, terms: int = 64) -> float:
    """Favard constant K_s, accurate to better than 1e-12.

    Raises ValueError if ``terms`` is too small for that guarantee.
    """
    value, err = favard_series(s, terms)
    if err >= 1e-12:
        raise ValueError(f"{terms} terms leave a truncation error bound {err:.3g} >= 1e-12")
    return value


# ---------------------------------------------------------------------------
# Upper bounds (product rules)


def _min_root(value: float, s: int) -> int:
    """Smallest integer m >= 1 with m^s >= value, i.e. ceil(value^(1/s))."""
    if value <= 1.0:
        return 1
    m = max(1, math.ceil(math.exp(math.log(value) / s)))
    while m > 1 and float(m - 1) ** s >= value:
        m -= 1
    while float(m) ** s < value:
        m += 1
    return m


def nonperiodic_size(eps: float, d: int, s: int) -> int:
    """m_s = max{s + 1, ceil((c_s d / eps)^(1/s))}."""
    return max(s + 1, _min_root(gauss_error_constant(s) * d / eps, s))


def n_upper_nonperiodic(eps: float, d: int, r: int) -> NonperiodicPlan:
    """Smallest Gauss product rule that certifies error eps, minimized over s = 1..r.

    Ties keep the smaller s.
    """
    eps = _check_eps(eps)
    d, r = _positive_int("d", d), _positive_int("r", r)
    best = None
    for s in range(1, r + 1):
        m = nonperiodic_size(eps, d, s)
        if best is None or m < best[1]:
            best = (s, m)
    s_star, m = best
    return NonperiodicPlan(m**d, s_star, m)


def n_upper_periodic(eps: float, d: int, r: int) -> PeriodicPlan:
    """Rectangle product rule size m = ceil((d / (2 (2 pi)^r eps))^(1/r))."""
    eps = _check_eps(eps)
    d, r = _positive_int("d", d), _positive_int("r", r)
    m = _min_root(d / (2.0 * (2.0 * math.pi) ** r * eps), r)
    return PeriodicPlan(m**d, m)


def iroot(n: int, d: int) -> int:
    """floor(n^(1/d)) in exact integer arithmetic."""
    n, d = int(n), _positive_int("d", d)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n < 2 or d == 1:
        return n
    # integer Newton iteration from a power of two above the root
    x = 1 << -(-n.bit_length() // d)
    while True:
        y = ((d - 1) * x + n // x ** (d - 1)) // d
        if y >= x:
            return x
        x = y


def e_upper(n: int, d: int, r: int, periodic: bool = False) -> float:
    """Worst-case error bound of the largest product rule with at most n nodes.

    Falls back to the trivial bound 1 when no rule is admissible.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    d, r = _positive_int("d", d), _positive_int("r", r)
    m = iroot(n, d)
    if periodic:
        return min(1.0, d / (2.0 * (2.0 * math.pi * m) ** r))
    admissible = [gauss_error_constant(s) * d * float(m) ** (-s) for s in range(1, r + 1) if m >= s + 1]
    return min([1.0] + admissible)


# ---------------------------------------------------------------------------
# Lower bounds (fooling functions)


def lower_constant(r: int, geometry=Geometry.CUBE_NONPERIODIC) -> float:
    """c_r = 1 / (K e r^(1 - 1/r)) with K = 4 (periodic) or 6 (otherwise)."""
    r = _positive_int("r", r)
    k = 4.0 if Geometry(geometry) is Geometry.PERIODIC else 6.0
    return 1.0 / (k * math.e * r ** (1.0 - 1.0 / r))


def default_delta(d: int, r: int) -> float:
    """delta = d / (d + r), the maximizer of (1 - delta) delta^(d/r)."""
    return d / (d + r)


def log_n_lower(eps: float, d: int, r: int, geometry=Geometry.CUBE_NONPERIODIC, delta: float | None = None) -> float:
    """Natural log of (1 - delta) c_r^d (delta d / eps)^(d/r)."""
    d, r = _positive_int("d", d), _positive_int("r", r)
    if delta is None:
        delta = default_delta(d, r)
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0,1), got {delta!r}")
    if not 0.0 < eps <= delta:
        raise ValueError(f"epsilon must lie in (0, delta] = (0, {delta:g}], got {eps!r}")
    return (
        math.log1p(-delta)
        + d * math.log(lower_constant(r, geometry))
        + (d / r) * math.log(delta * d / eps)
    )


def n_lower(eps: float, d: int, r: int, geometry=Geometry.CUBE_NONPERIODIC, delta: float | None = None) -> float:
    """Lower bound on the number of function values for error eps.

    Values below 1 are vacuous. Overflow returns ``inf``.
    """
    lg = log_n_lower(eps, d, r, geometry, delta)
    return math.exp(lg) if lg < 709.0 else math.inf


def e_lower(n: int, d: int, r: int, geometry=Geometry.CUBE_NONPERIODIC, delta: float | None = None) -> float:
    """Largest eps in (0, delta] with n_lower(eps) >= n, by bisection in log eps."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    d, r = _positive_int("d", d), _positive_int("r", r)
    if delta is None:
        delta = default_delta(d, r)
    target = math.log(n)

    def ok(log_eps):
        return log_n_lower(math.exp(log_eps), d, r, geometry, delta) >= target

    hi = math.log(delta)
    if ok(hi):
        return delta
    lo = hi
    for _ in range(4096):
        lo -= 1.0
        if ok(lo):
            break
    else:  # pragma: no cover
        return 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return math.exp(lo)


def reduce_lower_bound(problem, integration_lower: float) -> float:
    """Transfer an integration lower bound to approximation or optimization."""
    if integration_lower < 0:
        raise ValueError("integration_lower must be nonnegative")
    if Problem(problem) is Problem.OPT:
        return integration_lower / 2.0
    return integration_lower


# ---------------------------------------------------------------------------
# Reports


@dataclass
class BoundReport:
    spec: ClassSpec
    epsilon: float
    n_upper: int
    s_star: int | None
    m: int
    n_lower: float
    delta: float
    formulas: list = field(default_factory=list)

    def __post_init__(self):
        if self.m**self.spec.d != self.n_upper:
            raise ValueError("n_upper must equal m^d")

    @property
    def consistent(self) -> bool:
        return self.n_lower <= self.n_upper

    @property
    def rule(self) -> str:
        if self.spec.periodic:
            return f"{self.m}-point rectangle rule per axis"
        return f"{self.m}-point gauss per axis"

    @property
    def formula_ids(self) -> list[str]:
        return [f["id"] for f in self.formulas]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["rule"] = self.rule
        out["consistent"] = self.consistent
        return out


def plan(eps: float, d: int, r: int, periodic: bool = False, delta: float | None = None) -> BoundReport:
    """Upper and lower bounds on n(eps, d, r) with the chosen rule parameters.

    Without an explicit ``delta`` the optimal d/(d+r) is used; when eps
    exceeds it, delta = eps is the best admissible value.
    """
    eps = _check_eps(eps)
    spec = ClassSpec(r, d, periodic)
    optimal = default_delta(d, r)
    if delta is None:
        delta = max(optimal, eps)
    lower_id = PROP1 if periodic else THM3
    geometry = Geometry.PERIODIC if periodic else Geometry.CUBE_NONPERIODIC
    lo = n_lower(eps, d, r, geometry, delta)
    formulas = [{"id": lower_id, "epsilon": eps, "d": d, "r": r, "delta": delta, "c_r": lower_constant(r, geometry)}]
    if delta == optimal:
        formulas.append({"id": EQ_PER1 if periodic else EQ_DD, "delta": delta})

    if periodic:
        up = n_upper_periodic(eps, d, r)
        s_star, m = None, up.m
        formulas.append({"id": PROP2, "m": m, "bound": d / (2.0 * (2.0 * math.pi * m) ** r)})
    else:
        up = n_upper_nonperiodic(eps, d, r)
        s_star, m = up.s_star, up.m
        formulas.append({"id": THM4, "s": s_star, "m": m, "c_s": gauss_error_constant(s_star),
                         "bound": gauss_error_constant(s_star) * d * float(m) ** (-s_star)})
        formulas.append({"id": EQ_NONPER2, "m_s": {str(s): nonperiodic_size(eps, d, s) for s in range(1, r + 1)}})
    return BoundReport(spec, eps, up.n, s_star, m, lo, delta, formulas)
