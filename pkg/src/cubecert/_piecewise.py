"""Exact piecewise polynomials on the real line with rational coefficients.

Used to evaluate one-dimensional fooling functions without sampling error:
moving averages of piecewise polynomials are again piecewise polynomials.
"""

from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from math import comb


def _trim(c):
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def _add(a, b):
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def _scale(a, s):
    return _trim([s * c for c in a])


def _integrate(a):
    return [Fraction(0)] + [c / (i + 1) for i, c in enumerate(a)]


def _shift(a, t):
    """Coefficients of x -> p(x + t)."""
    out = [Fraction(0)] * len(a)
    for i, c in enumerate(a):
        for k in range(i + 1):
            out[k] += c * comb(i, k) * t ** (i - k)
    return _trim(out)


def _horner(a, x):
    v = Fraction(0)
    for c in reversed(a):
        v = v * x + c
    return v


class PiecewisePoly:
    """Pieces on (-inf, b0), [b0, b1), ..., [b_{K-1}, inf) in the global variable x."""

    def __init__(self, breaks, polys):
        if len(polys) != len(breaks) + 1:
            raise ValueError("need one more polynomial than breakpoints")
        self.breaks = list(breaks)
        self.polys = [_trim(p) for p in polys]
        self._merge()

    def _merge(self):
        breaks, polys = [], [self.polys[0]]
        for b, p in zip(self.breaks, self.polys[1:]):
            if p == polys[-1]:
                continue
            breaks.append(b)
            polys.append(p)
        self.breaks, self.polys = breaks, polys

    def piece(self, x):
        return self.polys[bisect_right(self.breaks, x)]

    def __call__(self, x):
        return _horner(self.piece(Fraction(x)), Fraction(x))

    def antiderivative(self):
        polys = []
        for i, p in enumerate(self.polys):
            q = _integrate(p)
            if i:
                b = self.breaks[i - 1]
                q[0] += _horner(polys[-1], b) - _horner(q, b)
            polys.append(q)
        return PiecewisePoly(self.breaks, polys)

    def shifted(self, t):
        """x -> self(x + t)."""
        return PiecewisePoly([b - t for b in self.breaks], [_shift(p, t) for p in self.polys])

    def combine(self, other, fn):
        breaks = sorted(set(self.breaks) | set(other.breaks))
        reps = _representatives(breaks)
        return PiecewisePoly(breaks, [fn(self.piece(x), other.piece(x)) for x in reps])

    def moving_average(self, a):
        """x -> (1 / 2a) * integral of self over [x - a, x + a]."""
        a = Fraction(a)
        F = self.antiderivative()
        inv = 1 / (2 * a)
        return F.shifted(a).combine(F.shifted(-a), lambda p, q: _scale(_add(p, _scale(q, -1)), inv))


def _representatives(breaks):
    if not breaks:
        return [Fraction(0)]
    reps = [breaks[0] - 1]
    reps += [(lo + hi) / 2 for lo, hi in zip(breaks, breaks[1:])]
    reps.append(breaks[-1] + 1)
    return reps


def piecewise_linear(breaks, values, left, right):
    """Continuous interpolant through (breaks, values), constant ``left``/``right`` outside."""
    polys = [[Fraction(left)]]
    for (x0, y0), (x1, y1) in zip(zip(breaks, values), zip(breaks[1:], values[1:])):
        slope = (y1 - y0) / (x1 - x0)
        polys.append([y0 - slope * x0, slope])
    polys.append([Fraction(right)])
    return PiecewisePoly(breaks, polys)
