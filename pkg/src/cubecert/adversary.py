"""Fooling functions: smooth functions that vanish on a point set but have a large integral.

For a point set P in [0,1]^d and radius rho the hat function

    h(x) = min{1, max{0, dist_1(x, P) - rho} / rho}

vanishes on the rho-neighbourhood of P and equals 1 beyond 2 rho. Smoothing
it by r successive averages over the l1 ball of radius rho / r gives
f_rho, which is 0 on P, 1 beyond 3 rho and has C^r norm at most
max{1, rho^-r (d r)^(r-1)}. Dividing by that bound puts it in the unit ball,
so no rule using only the points of P can have worst-case error below its
integral.

The r-fold average has no closed form for d >= 2 and is evaluated by Monte
Carlo as E[h(x + t_1 + ... + t_r)] with t_i uniform in the ball of radius
rho / r. For d = 1 an exact rational evaluator is provided as an oracle.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import _mc
from ._backend import hat_values, min_l1_dist
from ._piecewise import PiecewisePoly, piecewise_linear


class PointsFormatError(ValueError):
    def __init__(self, path, line, message):
        self.path, self.line = path, line
        super().__init__(f"{path}:{line}: {message}")


@dataclass(frozen=True)
class PointSet:
    """n points in [0,1]^d stored as a read-only (n, d) array."""

    d: int
    points: np.ndarray

    def __post_init__(self):
        if isinstance(self.d, bool) or int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d!r}")
        pts = np.array(self.points, dtype=np.float64).reshape(-1, self.d)
        if pts.size and (np.any(pts < 0.0) or np.any(pts > 1.0) or not np.all(np.isfinite(pts))):
            raise ValueError("point coordinates must lie in [0, 1]")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def __len__(self):
        return self.n

    @classmethod
    def grid(cls, k: int, d: int) -> "PointSet":
        """The k^d midpoint grid {(2i - 1) / (2k)}^d."""
        axis = (2 * np.arange(1, k + 1) - 1) / (2.0 * k)
        mesh = np.meshgrid(*([axis] * d), indexing="ij")
        return cls(d, np.stack([g.ravel() for g in mesh], axis=1))


def read_points_csv(path, d: int | None = None) -> PointSet:
    """Read one point per line, comma-separated, no header.

    The dimension comes from the first line and is enforced on the rest. An
    empty file yields an empty point set, which needs ``d`` to be given.
    """
    path = Path(path)
    rows = []
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                coords = [float(c) for c in row]
            except ValueError:
                raise PointsFormatError(path, lineno, f"not a list of decimal numbers: {','.join(row)!r}") from None
            if rows and len(coords) != len(rows[0]):
                raise PointsFormatError(path, lineno, f"expected {len(rows[0])} coordinates, got {len(coords)}")
            if d is not None and len(coords) != d:
                raise PointsFormatError(path, lineno, f"expected {d} coordinates, got {len(coords)}")
            if not all(0.0 <= c <= 1.0 for c in coords):
                raise PointsFormatError(path, lineno, "coordinates must lie in [0, 1]")
            rows.append(coords)
    if not rows:
        if d is None:
            raise PointsFormatError(path, 0, "empty point file; the dimension must be given explicitly")
        return PointSet(d, np.empty((0, d)))
    return PointSet(len(rows[0]), np.array(rows))


def choose_rho(eps: float, delta: float, d: int, r: int) -> float:
    """Radius (eps/delta)^(1/r) (d r)^(1 - 1/r), for which the norm bound is delta/eps."""
    if not 0 < eps <= delta:
        raise ValueError(f"need 0 < epsilon <= delta, got epsilon={eps}, delta={delta}")
    return (eps / delta) ** (1.0 / r) * (d * r) ** (1.0 - 1.0 / r)


def normalizer(rho: float, d: int, r: int) -> float:
    """Upper bound max{1, rho^-r (d r)^(r-1)} on the C^r norm of f_rho, valid for rho <= d r."""
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if r == 0:
        return 1.0
    if rho > d * r:
        raise ValueError(f"rho={rho} exceeds d*r={d * r}; the norm bound does not apply")
    return max(1.0, rho ** (-r) * float(d * r) ** (r - 1))


def integral_lower_bound(n: int, rho: float, d: int, periodic: bool = False) -> float:
    """1 - n (K rho)^d / d! with K = 6 (nonperiodic) or 4 (periodic); may be negative."""
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if n == 0:
        return 1.0
    k = 4.0 if periodic else 6.0
    lg = math.log(n) + d * math.log(k * rho) - math.lgamma(d + 1)
    return 1.0 - math.exp(min(lg, 709.0))


@dataclass(frozen=True)
class FoolingFn:
    points: PointSet
    rho: float
    r: int
    periodic: bool = False

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.r < 0:
            raise ValueError(f"r must be >= 0, got {self.r}")
        if self.r > 0 and self.rho > self.d * self.r:
            raise ValueError(f"rho={self.rho} exceeds d*r={self.d * self.r}")

    @classmethod
    def from_epsilon(cls, points: PointSet, eps: float, delta: float, r: int, periodic: bool = False) -> "FoolingFn":
        return cls(points, choose_rho(eps, delta, points.d, r), r, periodic)

    @property
    def d(self) -> int:
        return self.points.d

    @property
    def n(self) -> int:
        return self.points.n

    @property
    def rho_r(self) -> float:
        return self.rho / self.r if self.r else 0.0

    @property
    def normalizer(self) -> float:
        return normalizer(self.rho, self.d, self.r)

    def integral_lower_bound(self) -> float:
        return integral_lower_bound(self.n, self.rho, self.d, self.periodic)

    def canonical(self, x):
        """Inputs as a float array; periodic inputs are reduced to [0, 1)."""
        x = np.asarray(x, dtype=np.float64)
        return np.mod(x, 1.0) if self.periodic else x

    def hat(self, x):
        """h_rho at a point (returns float) or at each row of a (k, d) array."""
        x = self.canonical(x)
        single = x.ndim == 1
        vals = hat_values(np.atleast_2d(x), self.points.points, self.rho, self.periodic)
        return float(vals[0]) if single else vals

    def is_flat_at(self, x) -> bool:
        """True where f_rho is provably constant: on P (value 0) or beyond 3 rho (value 1)."""
        if self.n == 0:
            return True
        dist = float(min_l1_dist(self.canonical(x)[None, :], self.points.points, self.periodic)[0])
        return dist == 0.0 or dist > 3 * self.rho

    def shift_sums(self, rng, size):
        """``size`` draws of t_1 + ... + t_r, each t_i uniform in the ball of radius rho / r."""
        total = np.zeros((size, self.d))
        for _ in range(self.r):
            total += sample_l1_ball(self.d, self.rho_r, rng, size)
        return total


def l1_dist(x, P: PointSet, periodic: bool = False):
    """l1 distance from x (a point or (k, d) rows) to the nearest point of P.

    The periodic distance is to the lattice translates P + Z^d, computed
    coordinatewise with wrap-around.
    """
    if P.n == 0:
        raise ValueError("distance to an empty point set is undefined")
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    vals = min_l1_dist(np.atleast_2d(x), P.points, periodic)
    return float(vals[0]) if single else vals


def h_rho(x, F: FoolingFn):
    return F.hat(x)


def sample_l1_ball(d: int, radius: float, rng: np.random.Generator, size: int | None = None):
    """Uniform samples from the l1 ball of the given radius.

    d + 1 standard exponentials normalized by their sum give the first d
    coordinates of a uniform point of the simplex; independent random signs
    spread it over the ball.
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    k = 1 if size is None else size
    e = rng.standard_exponential((k, d + 1))
    signs = rng.integers(0, 2, size=(k, d)) * 2.0 - 1.0
    out = signs * (radius * (e[:, :d] / e.sum(axis=1, keepdims=True)))
    return out[0] if size is None else out


def fooling_values(F: FoolingFn, x, n_samples: int, rng: np.random.Generator):
    """n_samples values h(x + S) for one point x; an (n_samples,) array."""
    x = F.canonical(x)
    return hat_values(x[None, :] + F.shift_sums(rng, n_samples), F.points.points, F.rho, F.periodic)


def fooling_eval_mc(F: FoolingFn, x, n_samples: int, seed: int, workers: int = 1) -> tuple[float, float]:
    """Monte Carlo value of f_rho(x) and its standard error.

    If every sample took the same value but f_rho is not provably constant
    at x, the sample variance says nothing about rare outcomes; the standard
    error is then floored at sqrt(q (1 - q) / N) with q = 1 / (N + 2), so
    that three standard errors match the rule-of-three bound 3/N.
    """
    x = F.canonical(x)
    if x.shape != (F.d,):
        raise ValueError(f"expected a point of dimension {F.d}, got shape {x.shape}")
    if F.r == 0:
        return F.hat(x), 0.0
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    parts = _mc.map_chunks(lambda rng, k: fooling_values(F, x, k, rng), n_samples, seed, _mc.FOOLING, workers)
    mean, se = _mc.mean_and_stderr(np.concatenate(parts))
    if se == 0.0 and not F.is_flat_at(x):
        q = 1.0 / (n_samples + 2)
        se = math.sqrt(q * (1.0 - q) / n_samples)
    return mean, se


def finite_difference_mc(F: FoolingFn, x, axis: int, order: int, step: float, n_samples: int, seed: int,
                         workers: int = 1) -> tuple[float, float]:
    """Central difference quotient of f_rho along ``axis`` with common random numbers.

    Every stencil point is evaluated with the same shift samples, so the
    per-sample quotients have bounded variance. Supports orders 1 and 2.
    """
    stencils = {1: ([-1.0, 1.0], [-0.5, 0.5]), 2: ([-1.0, 0.0, 1.0], [1.0, -2.0, 1.0])}
    if order not in stencils:
        raise ValueError(f"order must be 1 or 2, got {order}")
    offsets, coeffs = stencils[order]
    x = np.asarray(x, dtype=np.float64)

    def chunk(rng, k):
        shifts = F.shift_sums(rng, k)
        acc = np.zeros(k)
        for off, c in zip(offsets, coeffs):
            probe = x.copy()
            probe[axis] += off * step
            acc += c * hat_values(F.canonical(probe)[None, :] + shifts, F.points.points, F.rho, F.periodic)
        return acc / step**order

    return _mc.mean_and_stderr(np.concatenate(_mc.map_chunks(chunk, n_samples, seed, _mc.DIFFERENCES, workers)))


def _hat_exact(x, nodes, rho):
    dist = min(abs(x - p) for p in nodes)
    return min(Fraction(1), max(Fraction(0), dist - rho) / rho)


def exact_fooling_1d(F: FoolingFn):
    """f_rho for d = 1 as an exact piecewise polynomial (degree <= r + 1)."""
    if F.d != 1:
        raise ValueError("the exact evaluator supports d = 1 only")
    if F.r > 4:
        raise ValueError("the exact evaluator supports r <= 4")
    if F.n == 0:
        return PiecewisePoly([], [[Fraction(1)]])
    rho = Fraction(F.rho)
    nodes = [Fraction(float(p)) for p in F.points.points[:, 0]]
    if F.periodic:
        reach = math.ceil(3 * F.rho) + 1
        nodes = [p + k for p in nodes for k in range(-reach, reach + 1)]
    nodes = sorted(set(nodes))
    cand = set()
    for p in nodes:
        cand.update((p, p - rho, p + rho, p - 2 * rho, p + 2 * rho))
    cand.update((a + b) / 2 for a, b in zip(nodes, nodes[1:]))
    breaks = sorted(cand)
    f = piecewise_linear(breaks, [_hat_exact(b, nodes, rho) for b in breaks], 1, 1)
    for _ in range(F.r):
        f = f.moving_average(rho / F.r)
    return f


def fooling_eval_exact_1d(F: FoolingFn, x, exact=None) -> float:
    """Exact f_rho(x) for d = 1 by symbolic moving averages of the hat function.

    Pass ``exact=exact_fooling_1d(F)`` to reuse the piecewise polynomial
    across many evaluations.
    """
    f = exact_fooling_1d(F) if exact is None else exact
    x = float(F.canonical(np.array([float(x)]))[0])
    return float(f(Fraction(x)))
