"""Verification experiments tying rules, bounds and fooling functions together.

Every check returns a ``VerificationReport``. Statistical checks allow a
slack of three standard errors, which keeps the false-failure rate of a
single check below one percent.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import asdict, dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Callable

import numpy as np

from . import _mc
from .adversary import (
    FoolingFn,
    PointSet,
    exact_fooling_1d,
    finite_difference_mc,
    fooling_eval_exact_1d,
    fooling_eval_mc,
    integral_lower_bound,
    sample_l1_ball,
)
from .bounds import (
    Geometry,
    Problem,
    n_lower,
    n_upper_nonperiodic,
    n_upper_periodic,
    plan,
    reduce_lower_bound,
)
from .quad1d import Rule1D, RuleKind, apply_rule, gauss_legendre, make_rule, midpoint, rectangle_periodic, rule_error_bound_1d
from .tensor import DEFAULT_CAP, evaluate, product_error_bound, product_rule

SIGMAS = 3.0

# The rectangle rule's stated constant 1/(2 (2 pi)^r m^r) is exceeded by the
# witness cos(2 pi m x) / (2 pi m)^r by exactly a factor 2; checks compare
# against twice the stated constant and record the ratio.
RECTANGLE_CONSTANT_GAP = 2.0


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n_samples: int
    seed: int


@dataclass
class VerificationReport:
    name: str
    passed: bool
    measured: float
    bound: float
    slack: float = 0.0
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: measured={self.measured:.6g} bound={self.bound:.6g} slack={self.slack:.3g}"


# ---------------------------------------------------------------------------
# Monte Carlo on the cube


def estimate_integral_mc(f: Callable, d: int, n_samples: int, seed: int, workers: int = 1,
                         vectorized: bool = True) -> McEstimate:
    """Plain Monte Carlo over [0,1]^d; ``f`` maps a (k, d) array to k values."""
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")

    def chunk(rng, k):
        x = rng.random((k, d))
        if vectorized:
            return np.asarray(f(x), dtype=np.float64).reshape(k)
        return np.array([f(row) for row in x], dtype=np.float64)

    mean, se = _mc.mean_and_stderr(np.concatenate(_mc.map_chunks(chunk, n_samples, seed, _mc.CUBE, workers)))
    return McEstimate(mean, se, n_samples, seed)


def nested_fooling_integral(F: FoolingFn, n_samples: int, seed: int, n_inner: int = 8,
                            workers: int = 1) -> McEstimate:
    """Integral of f_rho over the cube by nested Monte Carlo.

    Each outer point averages ``n_inner`` convolution samples. The reported
    standard error adds the outer variance and the mean inner variance in
    quadrature.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    if F.n == 0:
        return McEstimate(1.0, 0.0, n_samples, seed)
    inner = n_inner if F.r > 0 else 1

    def chunk(rng, k):
        x = rng.random((k, F.d))
        pts = np.repeat(x, inner, axis=0)
        if F.r > 0:
            pts += F.shift_sums(rng, k * inner)
        vals = F.hat(pts).reshape(k, inner)
        inner_var = vals.var(axis=1, ddof=1) / inner if inner > 1 else np.zeros(k)
        return np.stack([vals.mean(axis=1), inner_var], axis=1)

    data = np.concatenate(_mc.map_chunks(chunk, n_samples, seed, _mc.NESTED, workers))
    mean, outer_se = _mc.mean_and_stderr(data[:, 0])
    se = math.sqrt(outer_se**2 + float(np.mean(data[:, 1])) / n_samples)
    return McEstimate(mean, se, n_samples, seed)


def verify_fooling_integral(F: FoolingFn, n_samples: int, seed: int, n_inner: int = 8,
                            workers: int = 1) -> VerificationReport:
    est = nested_fooling_integral(F, n_samples, seed, n_inner, workers)
    bound = F.integral_lower_bound()
    slack = SIGMAS * est.stderr
    return VerificationReport(
        name=f"fooling-integral d={F.d} n={F.n} r={F.r} periodic={F.periodic}",
        passed=est.mean >= bound - slack,
        measured=est.mean,
        bound=bound,
        slack=slack,
        details={"rho": F.rho, "stderr": est.stderr, "n_samples": n_samples, "n_inner": n_inner, "seed": seed},
    )


# ---------------------------------------------------------------------------
# Witnesses


@dataclass(frozen=True)
class Witness:
    """A test integrand with a known integral and a bound on its C^r norm."""

    name: str
    fn: Callable  # (k, d) -> (k,)
    integral: float | None
    norm: float
    periodic: bool
    max_r: int | None = None  # largest smoothness class it belongs to


def _sawtooth_1d(nodes):
    nodes = np.asarray(nodes)
    gaps = np.diff(nodes)
    integral = nodes[0] ** 2 / 2 + math.fsum(gaps**2) / 4 + (1 - nodes[-1]) ** 2 / 2
    peak = max(nodes[0], 1 - nodes[-1], float(gaps.max()) / 2 if gaps.size else 0.0)

    def s(x):
        return np.min(np.abs(np.asarray(x)[..., None] - nodes), axis=-1)

    return s, integral, peak


def _max_product_norm(factor, d, r):
    """max over |beta|_1 <= r of prod_j factor(beta_j)."""
    best = {0: 1.0}  # total order -> best product so far
    for _ in range(d):
        nxt = {}
        for tot, val in best.items():
            for b in range(r - tot + 1):
                v = val * factor(b)
                nxt[tot + b] = max(nxt.get(tot + b, 0.0), v)
        best = nxt
    return max(best.values())


def make_witness(name: str, rule: Rule1D, d: int, r: int, frequency: int | None = None) -> Witness:
    """Witness ``name`` adapted to ``rule`` (sawtooth uses its nodes, trig its size)."""
    k = frequency if frequency is not None else rule.m
    if name == "sawtooth":
        s, I, peak = _sawtooth_1d(rule.nodes)
        if d == 1:
            return Witness(name, lambda x: s(x[:, 0]), I, 1.0, False, max_r=1)
        scale = (1.0 + peak) ** d
        return Witness(name, lambda x: np.prod(1.0 + s(x), axis=1), (1.0 + I) ** d, scale, False, max_r=1)
    if name in ("cos", "sin"):
        trig = np.cos if name == "cos" else np.sin
        w = 2 * math.pi * k
        return Witness(name, lambda x: trig(w * x[:, 0]), 0.0, max(1.0, w**r), True)
    if name == "product_cosine":
        k = frequency if frequency is not None else 1
        w = 2 * math.pi * k
        return Witness(name, lambda x: np.prod(np.cos(w * x), axis=1), 0.0, max(1.0, w**r), True)
    if name == "poly3":
        falling = {0: 1.0, 1: 3.0, 2: 6.0, 3: 6.0}
        norm = _max_product_norm(lambda b: falling.get(b, 0.0), d, r)
        return Witness(name, lambda x: np.prod(x**3, axis=1), 0.25**d, norm, False)
    if name == "bump":
        norm = _max_product_norm(lambda b: 1.0 if b == 0 else (2 * math.pi) ** b / 2, d, r)
        return Witness(name, lambda x: np.prod(np.sin(math.pi * x) ** 2, axis=1), 0.5**d, norm, True)
    if name == "fooling":
        # vanishes on every node of the product rule, so the rule returns 0;
        # the integral has no closed form, only the lower bound of F
        periodic = rule.kind is RuleKind.RECTANGLE_PERIODIC
        grid = np.stack(np.meshgrid(*([rule.nodes] * d), indexing="ij"), axis=-1).reshape(-1, d)
        rho = min(grid_rho_for_bound(len(grid), d, 0.5, periodic), d * r)
        F = FoolingFn(PointSet(d, grid), rho, r, periodic)

        def fn(x):
            return np.array([fooling_eval_mc(F, row, 64, 0)[0] for row in x])

        return Witness(name, fn, None, F.normalizer, periodic)
    raise ValueError(f"unknown witness {name!r}; expected one of {WITNESSES}")


WITNESSES = ("sawtooth", "cos", "sin", "product_cosine", "poly3", "bump", "fooling")


def verify_rule_vs_bound(kind, m: int, d: int, r: int, witness: str, frequency: int | None = None,
                         cap: int = DEFAULT_CAP, workers: int = 1) -> VerificationReport:
    """Error of the product rule on the normalized witness against its worst-case bound."""
    rule = make_rule(kind, m)
    w = make_witness(witness, rule, d, r, frequency)
    if w.max_r is not None and r > w.max_r:
        raise ValueError(f"witness {witness!r} only belongs to smoothness classes r <= {w.max_r}")
    if w.integral is None:
        raise ValueError(f"witness {witness!r} has no closed-form integral")
    if rule.kind is RuleKind.RECTANGLE_PERIODIC and not w.periodic:
        raise ValueError(f"the periodic rectangle rule needs a periodic witness, {witness!r} is not")
    value = evaluate(product_rule(rule, d), w.fn, vectorized=True, cap=cap, workers=workers)
    measured = abs(value - w.integral) / w.norm
    stated = product_error_bound(rule_error_bound_1d(rule.kind, m, r), rule.abs_weight_sum, d)
    checked = stated * (RECTANGLE_CONSTANT_GAP if rule.kind is RuleKind.RECTANGLE_PERIODIC else 1.0)
    return VerificationReport(
        name=f"rule-vs-bound {rule.kind.value} m={m} d={d} r={r} witness={witness}",
        passed=measured <= checked * (1 + 1e-9),
        measured=measured,
        bound=checked,
        slack=checked * 1e-9,
        details={"stated_bound": stated, "ratio_to_stated": measured / stated, "quadrature": value,
                 "integral": w.integral, "norm": w.norm},
    )


# ---------------------------------------------------------------------------
# Bound tables


CSV_HEADER = ("epsilon", "d", "r", "geometry", "n_lower", "n_upper", "s_star", "m", "formula")


def bound_table(eps_grid, d_grid, r_grid, geometry: str = "nonperiodic") -> list[dict]:
    """One row per (epsilon, d, r[, geometry]) in the given grid order."""
    geometries = {"nonperiodic": (False,), "periodic": (True,), "both": (False, True)}[geometry]
    if not (eps_grid and d_grid and r_grid):
        raise ValueError("grids must be nonempty")
    rows = []
    for eps, d, r, periodic in itertools.product(eps_grid, d_grid, r_grid, geometries):
        rep = plan(eps, d, r, periodic)
        rows.append({
            "epsilon": eps, "d": d, "r": r,
            "geometry": "periodic" if periodic else "nonperiodic",
            "n_lower": rep.n_lower, "n_upper": rep.n_upper,
            "s_star": "" if rep.s_star is None else rep.s_star,
            "m": rep.m, "formula": ";".join(rep.formula_ids),
        })
    return rows


def bound_table_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in (row[k] for k in CSV_HEADER)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Suites


def n_lower_decimal(eps, d, r, delta, geometry=Geometry.CUBE_NONPERIODIC, digits=50) -> Decimal:
    """Direct high-precision evaluation of (1 - delta) c_r^d (delta d / eps)^(d/r)."""
    with localcontext() as ctx:
        ctx.prec = digits
        D = Decimal
        k = D(4) if Geometry(geometry) is Geometry.PERIODIC else D(6)
        e = D(1).exp()
        rr = D(r)
        c = 1 / (k * e * rr ** (1 - 1 / rr))
        delta = D(delta.numerator) / D(delta.denominator) if hasattr(delta, "numerator") else D(repr(delta))
        return (1 - delta) * c ** d * (delta * D(d) / D(repr(eps))) ** (D(d) / rr)


def quadrature_suite(workers: int = 1) -> list[VerificationReport]:
    out = []
    worst = 0.0
    for m in range(1, 31):
        rule = gauss_legendre(m)
        for k in range(2 * m):
            worst = max(worst, abs(apply_rule(rule, lambda x: x**k) - 1.0 / (k + 1)))
    out.append(VerificationReport("gauss-exactness m<=30", worst <= 1e-12, worst, 1e-12))

    for m in (1, 4, 16):
        rule = midpoint(m)
        s, I, _ = _sawtooth_1d(rule.nodes)
        err = abs(apply_rule(rule, lambda x: float(s(x))) - I)
        out.append(VerificationReport(f"midpoint-sawtooth m={m}", abs(err - 1 / (4 * m)) <= 1e-12, err, 1 / (4 * m),
                                      slack=1e-12))

    worst = 0.0
    for m in range(2, 17):
        rule = rectangle_periodic(m)
        for k in range(1, m):
            for g in (math.sin, math.cos):
                worst = max(worst, abs(apply_rule(rule, lambda x: g(2 * math.pi * k * x))))
    out.append(VerificationReport("rectangle-trig-exactness", worst <= 1e-12, worst, 1e-12))

    for m, r in ((2, 1), (4, 1), (8, 2), (5, 3)):
        rep = verify_rule_vs_bound("rectangle_periodic", m, 1, r, "cos", workers=workers)
        target = (2 * math.pi * m) ** (-r)
        rep.details["expected_error"] = target
        rep.passed = rep.passed and abs(rep.measured - target) <= 1e-10
        out.append(rep)

    for d in range(1, 5):
        for m in range(1, 9):
            rep = verify_rule_vs_bound("midpoint", m, d, 1, "sawtooth", workers=workers)
            limit = d * (1 / (4 * m)) + 1e-12
            rep.name = f"product-propagation midpoint m={m} d={d}"
            rep.passed = rep.measured <= limit
            rep.bound = limit
            out.append(rep)

    out.append(verify_rule_vs_bound("gauss", 4, 2, 2, "product_cosine", workers=workers))
    out.append(verify_rule_vs_bound("gauss", 6, 3, 3, "bump", workers=workers))
    out.append(verify_rule_vs_bound("gauss", 2, 2, 1, "poly3", workers=workers))
    return out


def bounds_suite() -> list[VerificationReport]:
    out = []
    got = n_upper_nonperiodic(0.01, 3, 2)
    out.append(VerificationReport("planner nonperiodic eps=0.01 d=3 r=2", tuple(got) == (216, 2, 6), got.n, 216,
                                  details={"s_star": got.s_star, "m": got.m}))
    got = n_upper_periodic(0.1, 2, 1)
    out.append(VerificationReport("planner periodic eps=0.1 d=2 r=1", tuple(got) == (4, 2), got.n, 4,
                                  details={"m": got.m}))

    val = n_lower(0.1, 20, 1, Geometry.CUBE_NONPERIODIC, 20 / 21)
    ref = float(n_lower_decimal(0.1, 20, 1, Fraction(20, 21)))
    rel = abs(val - ref) / ref
    out.append(VerificationReport("n_lower eps=0.1 d=20 r=1", rel <= 1e-9, val, ref, slack=1e-9 * ref,
                                  details={"relative_error": rel}))

    violations = []
    cells = 0
    for eps, d, r, periodic in itertools.product((0.5, 0.1, 0.01), (1, 2, 3, 5, 10, 20), (1, 2, 3), (False, True)):
        rep = plan(eps, d, r, periodic)
        cells += 1
        if not rep.consistent:
            violations.append([eps, d, r, periodic])
    out.append(VerificationReport("consistency-grid n_lower <= n_upper", not violations, len(violations), 0,
                                  details={"cells": cells, "violations": violations}))

    bad = []
    for L in (val, ref, 0.0, 0.3, 1.0):
        if reduce_lower_bound(Problem.OPT, L) != L / 2 or reduce_lower_bound(Problem.APP, L) != L:
            bad.append(L)
    out.append(VerificationReport("app-opt-reductions", not bad, len(bad), 0))
    return out


def oracle_agreement(r: int, seed: int, n_points: int = 100, n_samples: int = 20000, workers: int = 1):
    """MC versus exact 1-d fooling values at random points; returns (hits, total)."""
    F = FoolingFn(PointSet(1, [[0.3], [0.7]]), 0.1, r)
    exact = exact_fooling_1d(F)
    xs = np.random.default_rng([seed, 99, r]).random(n_points)
    hits = 0
    for i, x in enumerate(xs):
        est, se = fooling_eval_mc(F, np.array([x]), n_samples, seed * 1000 + i, workers)
        ref = fooling_eval_exact_1d(F, x, exact)
        if abs(est - ref) <= SIGMAS * se:
            hits += 1
    return hits, n_points


def derivative_checks(d: int, r: int, seed: int, n_probes: int = 50, n_samples: int = 4000,
                      workers: int = 1) -> list[VerificationReport]:
    """Finite-difference derivative estimates against rho^-l (d r)^(l-1), l <= r."""
    rng = np.random.default_rng([seed, 77, d, r])
    P = PointSet(d, rng.random((3, d)))
    F = FoolingFn(P, 0.15, r)
    # probes within 3 rho of a node, where f_rho is not flat
    offsets = np.stack([sample_l1_ball(d, 3 * F.rho, rng) for _ in range(n_probes)])
    probes = np.clip(P.points[rng.integers(0, P.n, n_probes)] + offsets, 0.0, 1.0)
    out = []
    for order in range(1, r + 1):
        bound = F.rho ** (-order) * float(d * r) ** (order - 1)
        step = F.rho / 10
        worst, fails = 0.0, []
        for i, x in enumerate(probes):
            for axis in range(d):
                est, se = finite_difference_mc(F, x, axis, order, step, n_samples, seed + i, workers)
                excess = abs(est) - (bound * 1.05 + SIGMAS * se)
                worst = max(worst, abs(est))
                if excess > 0:
                    fails.append([i, axis, est, se])
        out.append(VerificationReport(f"derivative-bound d={d} r={r} order={order}", not fails, worst, bound * 1.05,
                                      details={"failures": fails, "probes": n_probes, "step": step}))
    return out


def adversary_suite(seed: int = 0, workers: int = 1, n_samples: int = 20000) -> list[VerificationReport]:
    out = []
    rng = np.random.default_rng([seed, 5])
    P = PointSet(3, rng.random((6, 3)))
    for periodic in (False, True):
        for r in (1, 2):
            F = FoolingFn(P, 0.1, r, periodic)
            node_vals = [fooling_eval_mc(F, x, 512, seed, workers)[0] for x in P.points]
            bad = [i for i, v in enumerate(node_vals) if v != 0.0]
            out.append(VerificationReport(f"fooling-zero-at-nodes r={r} periodic={periodic}", not bad,
                                          float(max(node_vals)), 0.0, details={"nonzero_nodes": bad}))
    F = FoolingFn(P, 0.05, 2)
    probes = rng.random((200, 3))
    probes = probes[F.points.n == 0 or np.array([np.abs(P.points - x).sum(axis=1).min() > 3 * F.rho for x in probes])]
    far_vals = [fooling_eval_mc(F, x, 512, seed, workers) for x in probes]
    bad = [i for i, (v, se) in enumerate(far_vals) if v != 1.0 or se != 0.0]
    out.append(VerificationReport("fooling-one-far-from-nodes", not bad, float(min(v for v, _ in far_vals)), 1.0,
                                  details={"probes": len(probes), "failures": bad}))

    grid = PointSet.grid(2, 3)
    rho = grid_rho_for_bound(grid.n, 3, 0.5)
    for periodic in (False, True):
        F = FoolingFn(grid, rho, 2, periodic)
        rep = verify_fooling_integral(F, n_samples, seed, workers=workers)
        if periodic:
            rep.details["nonperiodic_bound"] = integral_lower_bound(grid.n, rho, 3, False)
        out.append(rep)

    for r in (1, 2, 3):
        hits, total = oracle_agreement(r, seed, n_points=100, n_samples=20000, workers=workers)
        out.append(VerificationReport(f"oracle-agreement-1d r={r}", hits >= 95, hits, 95, details={"total": total}))

    for d in (1, 2, 3):
        for r in (1, 2):
            out.extend(derivative_checks(d, r, seed, n_probes=10, n_samples=2000, workers=workers))
    return out


def grid_rho_for_bound(n: int, d: int, target: float, periodic: bool = False) -> float:
    """rho with 1 - n (K rho)^d / d! = target."""
    k = 4.0 if periodic else 6.0
    return (math.factorial(d) * (1.0 - target) / n) ** (1.0 / d) / k


SUITES = {
    "quadrature": lambda seed, workers: quadrature_suite(workers),
    "bounds": lambda seed, workers: bounds_suite(),
    "adversary": lambda seed, workers: adversary_suite(seed, workers),
}


def run_suite(name: str, seed: int = 0, workers: int = 1) -> list[VerificationReport]:
    if name == "all":
        return [rep for key in SUITES for rep in SUITES[key](seed, workers)]
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](seed, workers)
