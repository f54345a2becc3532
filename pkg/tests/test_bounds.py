"""Bound formulas against arbitrary-precision and brute-force oracles."""

import math

import mpmath
import pytest
from hypothesis import assume, given, settings, strategies as st

from cubecert.bounds import (
    EQ_DD,
    EQ_PER1,
    PROP1,
    PROP2,
    THM3,
    THM4,
    BoundReport,
    ClassSpec,
    Geometry,
    Problem,
    default_delta,
    e_lower,
    e_upper,
    favard,
    favard_series,
    iroot,
    log_n_lower,
    lower_constant,
    n_lower,
    n_upper_nonperiodic,
    n_upper_periodic,
    plan,
    reduce_lower_bound,
)

mpmath.mp.dps = 40


def favard_oracle(s):
    p = s + 1
    sign = -1 if p % 2 else 1
    return 4 / mpmath.pi * mpmath.nsum(lambda k: mpmath.mpf(sign) ** k / (2 * k + 1) ** p, [0, mpmath.inf])


def c_s(s):
    return mpmath.pi / 2 * (mpmath.e / (6 * mpmath.sqrt(3))) ** s


def plan_oracle(eps, d, r):
    """Smallest m_s by linear search in high precision, then the best s."""
    best = None
    for s in range(1, r + 1):
        m = s + 1
        while c_s(s) * d * mpmath.mpf(m) ** (-s) > eps:
            m += 1
        if best is None or m < best[1]:
            best = (s, m)
    return best[1] ** d, best[0], best[1]


def periodic_oracle(eps, d, r):
    m = 1
    while d / (2 * (2 * mpmath.pi) ** r * mpmath.mpf(m) ** r) > eps:
        m += 1
    return m**d, m


def n_lower_oracle(eps, d, r, delta, k=6):
    eps, delta = mpmath.mpf(eps), mpmath.mpf(delta)
    c = 1 / (k * mpmath.e * mpmath.mpf(r) ** (1 - mpmath.mpf(1) / r))
    return (1 - delta) * c**d * (delta * d / eps) ** (mpmath.mpf(d) / r)


# ---------------------------------------------------------------------------
# Favard constants


@pytest.mark.parametrize("s", range(0, 21))
def test_favard_matches_mpmath(s):
    value, err = favard_series(s)
    assert err < 1e-13
    assert abs(value - float(favard_oracle(s))) <= max(err, 1e-15)


def test_favard_closed_forms():
    assert favard(0) == pytest.approx(1.0, abs=1e-14)
    assert favard(1) == pytest.approx(math.pi / 2, abs=1e-14)
    assert favard(2) == pytest.approx(math.pi**2 / 8, abs=1e-14)
    assert favard(3) == pytest.approx(math.pi**3 / 24, abs=1e-14)


def test_favard_range_and_limit():
    vals = [favard(s) for s in range(0, 40)]
    assert all(1.0 - 1e-14 <= v <= math.pi / 2 + 1e-14 for v in vals)
    # even-indexed values increase and odd-indexed values decrease towards 4/pi
    # (strictly until the gap drops below rounding level)
    assert all(a < b for a, b in zip(vals[0:20:2], vals[2:20:2]))
    assert all(a > b for a, b in zip(vals[1:20:2], vals[3:20:2]))
    assert vals[-1] == pytest.approx(4 / math.pi, abs=1e-11)


def test_favard_rejects_too_few_terms():
    with pytest.raises(ValueError):
        favard(0, terms=1)
    with pytest.raises(ValueError):
        favard(-1)


# ---------------------------------------------------------------------------
# Planners


def test_planner_examples():
    assert tuple(n_upper_nonperiodic(0.01, 3, 2)) == (216, 2, 6)
    assert tuple(n_upper_nonperiodic(0.01, 3, 2)) == plan_oracle(0.01, 3, 2)
    assert tuple(n_upper_periodic(0.1, 2, 1)) == (4, 2)
    assert tuple(n_upper_periodic(0.1, 2, 1)) == periodic_oracle(0.1, 2, 1)
    assert tuple(n_upper_nonperiodic(0.1, 2, 1)) == (81, 1, 9)
    assert tuple(n_upper_periodic(0.01, 1, 1)) == (8, 8)


@given(eps=st.floats(1e-4, 0.9), d=st.integers(1, 8), r=st.integers(1, 4))
@settings(max_examples=60, deadline=None)
def test_planners_match_oracle(eps, d, r):
    assert tuple(n_upper_nonperiodic(eps, d, r)) == plan_oracle(eps, d, r)
    assert tuple(n_upper_periodic(eps, d, r)) == periodic_oracle(eps, d, r)


@given(eps=st.floats(1e-4, 0.9), d=st.integers(1, 8), r=st.integers(1, 4), periodic=st.booleans())
@settings(max_examples=60, deadline=None)
def test_planned_rule_meets_tolerance(eps, d, r, periodic):
    up = n_upper_periodic(eps, d, r) if periodic else n_upper_nonperiodic(eps, d, r)
    assert e_upper(up.n, d, r, periodic) <= eps * (1 + 1e-12)


@given(n=st.integers(0, 10**30), d=st.integers(1, 12))
def test_iroot(n, d):
    m = iroot(n, d)
    assert m**d <= n < (m + 1) ** d


def test_e_upper_fallback():
    assert e_upper(1, 5, 3) == 1.0
    assert e_upper(8, 1, 1, periodic=True) == pytest.approx(1 / (4 * math.pi * 8))
    with pytest.raises(ValueError):
        e_upper(0, 2, 1)


def test_planner_input_validation():
    for bad in (0.0, 1.0, 1.5, -0.1):
        with pytest.raises(ValueError, match="epsilon"):
            n_upper_nonperiodic(bad, 2, 1)
    with pytest.raises(ValueError):
        n_upper_periodic(0.1, 0, 1)
    with pytest.raises(ValueError):
        ClassSpec(0, 2)


# ---------------------------------------------------------------------------
# Lower bounds


def test_n_lower_headline_value():
    val = n_lower(0.1, 20, 1, Geometry.CUBE_NONPERIODIC, 20 / 21)
    closed = (mpmath.mpf(1) / 21) * ((mpmath.mpf(20) / 21) * 200 / (6 * mpmath.e)) ** 20
    assert abs(val - float(closed)) <= 1e-9 * float(closed)
    assert val == pytest.approx(1.0609e20, rel=1e-4)


@given(
    eps=st.floats(1e-3, 0.5),
    d=st.integers(1, 30),
    r=st.integers(1, 5),
    geometry=st.sampled_from(list(Geometry)),
)
@settings(max_examples=80, deadline=None)
def test_n_lower_matches_mpmath(eps, d, r, geometry):
    delta = default_delta(d, r)
    assume(eps <= delta)
    k = 4 if geometry is Geometry.PERIODIC else 6
    ref = n_lower_oracle(eps, d, r, delta, k)
    assert abs(log_n_lower(eps, d, r, geometry) - float(mpmath.log(ref))) <= 1e-12 * max(1.0, abs(float(mpmath.log(ref))))


def test_lower_constant():
    assert lower_constant(1) == pytest.approx(1 / (6 * math.e))
    assert lower_constant(2, Geometry.PERIODIC) == pytest.approx(1 / (4 * math.e * math.sqrt(2)))
    assert lower_constant(1, Geometry.GENERAL_DOMAIN) == lower_constant(1)


def test_n_lower_domain():
    with pytest.raises(ValueError, match="delta"):
        n_lower(0.5, 1, 1, delta=1.0)
    with pytest.raises(ValueError, match="epsilon"):
        n_lower(0.6, 1, 1, delta=0.5)
    assert n_lower(1e-300, 500, 1) == math.inf


def test_n_lower_accepts_epsilon_equal_to_delta():
    assert n_lower(2 / 3, 2, 1, Geometry.PERIODIC) > 0
    with pytest.raises(ValueError):
        n_lower(0.7, 2, 1, Geometry.PERIODIC)


def test_vacuous_lower_bound():
    # the bound can fall below one; it is reported, not clamped
    assert n_lower(0.5, 1, 1) == pytest.approx(0.5 / (6 * math.e), rel=1e-14)


@given(n=st.integers(1, 10**12), d=st.integers(1, 10), r=st.integers(1, 3), periodic=st.booleans())
@settings(max_examples=50, deadline=None)
def test_e_lower_inverts_n_lower(n, d, r, periodic):
    geometry = Geometry.PERIODIC if periodic else Geometry.CUBE_NONPERIODIC
    eps = e_lower(n, d, r, geometry)
    delta = default_delta(d, r)
    if eps < delta:
        assert n_lower(eps, d, r, geometry) == pytest.approx(n, rel=1e-9)
    else:
        assert n_lower(delta, d, r, geometry) >= n
    # and never contradicts the upper bound on the cube
    assert eps <= e_upper(n, d, r, periodic) * (1 + 1e-12)


def test_e_lower_example():
    assert e_lower(1, 2, 1) == pytest.approx(0.0472, abs=1e-4)


def test_reductions():
    for L in (0.0, 1e-3, 0.5, 1.0609e20):
        assert reduce_lower_bound(Problem.OPT, L) == L / 2
        assert reduce_lower_bound(Problem.APP, L) == L
        assert reduce_lower_bound("INT", L) == L
    with pytest.raises(ValueError):
        reduce_lower_bound(Problem.APP, -1.0)


# ---------------------------------------------------------------------------
# Reports


def test_plan_report_nonperiodic():
    rep = plan(0.01, 3, 2)
    assert (rep.n_upper, rep.s_star, rep.m) == (216, 2, 6)
    assert rep.delta == 0.6 and rep.consistent
    assert rep.formula_ids[:2] == [THM3, EQ_DD] and THM4 in rep.formula_ids
    assert rep.rule == "6-point gauss per axis"
    d = rep.to_dict()
    assert d["n_upper"] == 216 and d["spec"] == {"r": 2, "d": 3, "periodic": False}


def test_plan_report_periodic():
    rep = plan(0.1, 2, 1, periodic=True)
    assert (rep.n_upper, rep.m, rep.s_star) == (4, 2, None)
    assert rep.formula_ids == [PROP1, EQ_PER1, PROP2]


def test_plan_large_epsilon_uses_admissible_delta():
    rep = plan(0.5, 1, 3)
    assert rep.delta == 0.5
    assert EQ_DD not in rep.formula_ids


def test_report_shape_invariant():
    with pytest.raises(ValueError):
        BoundReport(ClassSpec(1, 2), 0.1, 10, 1, 3, 1.0, 0.5)


@pytest.mark.parametrize("periodic", [False, True])
def test_consistency_grid(periodic):
    for eps in (0.5, 0.1, 0.01):
        for d in (1, 2, 3, 5, 10, 20):
            for r in (1, 2, 3):
                assert plan(eps, d, r, periodic).consistent
