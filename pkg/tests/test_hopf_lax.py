import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logsob.calculus import RadialFunction
from logsob.families import hyper_class_battery
from logsob.hopf_lax import (
    ClassViolationError,
    HopfLaxParams,
    growth_bound_check,
    hj_check,
    hj_initial_check,
    hopf_lax_bruteforce,
    hopf_lax_fast,
    hopf_lax_function,
    hopf_lax_transform,
    metric_inequality_check,
    semigroup_monotonicity_check,
    validate_class,
)
from logsob.inequalities.hyper import certify
from logsob.spaces import model_cone


def quadratic(a, r_max=6.0, n=801):
    return RadialFunction.from_callable(
        lambda r: a * np.asarray(r, dtype=float) ** 2,
        np.linspace(0.0, r_max, n),
        derivative=lambda r: 2 * a * np.asarray(r, dtype=float),
    )


def dense_oracle(u, x, t, pc, n=200001, span=None):
    # direct minimization over a very fine candidate grid
    span = span or 4 * u.r_max
    y = np.linspace(0.0, span, n)
    uy = u(y)
    denom = pc * t ** (pc - 1)
    return np.array([np.min(uy + np.abs(xi - y) ** pc / denom) for xi in np.atleast_1d(x)])


@pytest.mark.parametrize("a", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("t", [0.1, 0.7])
def test_quadratic_closed_form(a, t):
    u = quadratic(a)
    x = np.linspace(0, 6, 13)
    q = hopf_lax_transform(u, t, 2.0, queries=x)
    np.testing.assert_allclose(q.values, a * x**2 / (1 + 2 * a * t), rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("pc", [1.5, 2.0, 3.0])
def test_against_dense_oracle(pc):
    u = RadialFunction.from_callable(
        lambda r: np.sin(3 * np.asarray(r)) - 0.2 * np.asarray(r) ** 1.2, np.linspace(0, 4, 401)
    )
    x = np.linspace(0, 4, 9)
    got = hopf_lax_transform(u, 0.3, pc, queries=x).values
    np.testing.assert_allclose(got, dense_oracle(u, x, 0.3, pc), atol=1e-8)


@pytest.mark.parametrize("pc", [1.5, 2.0, 2.7])
def test_fast_equals_brute_on_grid(pc, rng):
    r = np.sort(rng.uniform(0, 5, 300))
    u = RadialFunction(r, rng.normal(size=300).cumsum() * 0.1)
    params = HopfLaxParams(pc, 0.4, 1.0)
    fast = hopf_lax_fast(u, params)
    brute = hopf_lax_bruteforce(u, params)
    np.testing.assert_allclose(fast.values, brute.values, rtol=0, atol=1e-12)


def test_t_zero_is_identity():
    u = quadratic(1.0)
    q = hopf_lax_transform(u, 0.0, 2.0)
    np.testing.assert_array_equal(q.values, u.values)
    with pytest.raises(ValueError):
        hopf_lax_transform(u, -0.1, 2.0)


def test_scalar_query():
    u = quadratic(1.0)
    assert hopf_lax_transform(u, 0.5, 2.0, queries=2.0).values[0] == pytest.approx(2.0)


def test_unsorted_queries_keep_order():
    u = quadratic(1.0)
    x = np.array([3.0, 0.5, 2.0])
    q = hopf_lax_transform(u, 0.5, 2.0, queries=x)
    np.testing.assert_allclose(q.values, x**2 / 2.0)


def test_semigroup_property():
    u = RadialFunction.from_callable(lambda r: np.cos(np.asarray(r)) - 0.1 * np.asarray(r) ** 2, np.linspace(0, 8, 801))
    s, t = 0.2, 0.5
    x = np.linspace(0, 5, 11)
    q_st = hopf_lax_transform(u, s + t, 2.0, queries=x).values
    q_s = hopf_lax_function(u, s, 2.0)
    q_t_q_s = hopf_lax_transform(q_s, t, 2.0, queries=x).values
    np.testing.assert_allclose(q_t_q_s, q_st, atol=1e-9)


@given(st.floats(0.01, 0.9), st.floats(0.01, 0.9))
@settings(max_examples=20, deadline=None)
def test_monotone_in_time(t1, t2):
    r = np.linspace(0, 4, 201)
    u = RadialFunction(r, np.sin(2 * r))
    lo, hi = sorted((t1, t2))
    a = hopf_lax_transform(u, lo, 1.8).values
    b = hopf_lax_transform(u, hi, 1.8).values
    assert np.all(b <= a + 1e-14)
    assert np.all(a <= u.values + 1e-14)


@given(
    st.floats(0, 10), st.floats(0, 10), st.floats(0, 10),
    st.floats(0.01, 5), st.floats(0.01, 5), st.floats(1.01, 4),
)
def test_metric_inequality(x, y, z, t, s, r):
    assert metric_inequality_check(x, y, z, t, s, r)


def test_params_validation():
    with pytest.raises(ValueError):
        HopfLaxParams(2.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        HopfLaxParams(1.0, 0.1, 1.0)
    p = HopfLaxParams(3.0, 0.1, 1.0)
    assert p.p == pytest.approx(1.5)
    assert p.at(0.2).t == 0.2


@pytest.mark.parametrize("p, alpha, t0", [(2.0, 1.0, 0.5), (1.5, 2.0, 0.5), (3.0, 1.0, 0.5)])
def test_class_battery_members_are_admissible(p, alpha, t0):
    pc = p / (p - 1)
    params = HopfLaxParams(pc, 0.5 * t0, t0)
    for m in hyper_class_battery(p, alpha, t0):
        cert = validate_class(m.u, params, m.M, m.C0)
        assert cert.valid, (m.name, cert.failures())


def test_class_violation_for_steep_well():
    # u = -r^2 / C with C below the threshold 2 t0 violates the growth condition
    params = HopfLaxParams(2.0, 0.25, 0.5)
    u = quadratic(-2.0, r_max=10.0)
    cert = validate_class(u, params, 0.0, 0.5)
    assert not cert.valid and "A3" in cert.failures()
    with pytest.raises(ClassViolationError):
        certify(u, params)


def test_hamilton_jacobi_checks():
    u = hyper_class_battery(2.0, 1.0, 0.5)[6].u  # power-bump
    params = HopfLaxParams(2.0, 0.2, 0.5)
    assert hj_check(u, params).passed
    assert hj_check(u, params, mode="grid").passed
    assert hj_initial_check(u, 2.0).passed
    with pytest.raises(ValueError):
        hj_check(u, params, mode="nope")


def test_growth_and_monotonicity_reports():
    m = hyper_class_battery(2.0, 1.0, 0.5)[3]
    params = HopfLaxParams(2.0, 0.2, 0.5)
    assert growth_bound_check(m.u, params, m.M, m.C0).passed
    assert semigroup_monotonicity_check(m.u, params, model_cone(2.0)).passed


@pytest.mark.parametrize("pc", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("index", [0, 3, 5, 9])
def test_hamilton_jacobi_on_sampled_members(pc, index):
    # no evaluator: candidates are the grid, slopes are grid quotients
    p = pc / (pc - 1)
    m = hyper_class_battery(p, 1.0, 0.5)[index]
    g = RadialFunction(m.u.grid, m.u.values)
    params = HopfLaxParams(pc, 0.2, 0.5)
    assert hj_check(g, params).params["mode"] == "grid"
    assert hj_check(g, params).passed
    assert hj_initial_check(g, pc).passed
