"""Small worked values checked against hand-derived numbers or scipy."""

import math

import numpy as np
import pytest
from scipy import integrate

from logsob.calculus import RadialFunction, entropy, lp_norm, slope
from logsob.constants import (
    gamma,
    gaussian_hyper_exponent,
    hyper_best_constant,
    log_alpha_beta_factor,
    lsc_constant,
    sigma,
)
from logsob.families import bump
from logsob.hopf_lax import HopfLaxParams, hj_check, hopf_lax_transform, metric_inequality_check, validate_class
from logsob.inequalities import gaussian_G, log_ratio_limit, onedim_lsi_verify, optimal_y
from logsob.rearrange import distribution, rearrangement
from logsob.spaces import angle_deficit_cone, ball_volume, euclidean, model_cone


def radial(f, r_max, n=801, **kw):
    return RadialFunction.from_callable(f, np.linspace(0.0, r_max, n), **kw)


def test_lsc_matches_weighted_cone_constant():
    # n = 1, tau = N - 1: the weight N sigma_N r^{N-1} has unit-ball mass sigma_N
    for p, N in [(2.0, 2.0), (1.5, 3.0), (3.0, 4.5)]:
        mass = integrate.quad(lambda r: N * sigma(N) * r ** (N - 1), 0.0, 1.0)[0]
        pc = p / (p - 1)
        ref = (p / N) * ((p - 1) / math.e) ** (p - 1) * (gamma(N / pc + 1) * mass) ** (-p / N)
        assert lsc_constant(p, N) == pytest.approx(ref, rel=1e-12)


def test_lsc_in_three_dimensions():
    ref = (2 / 3) / math.e * ((4 * math.pi / 3) * (3 * math.sqrt(math.pi) / 4)) ** (-2 / 3)
    assert lsc_constant(2.0, 3.0) == pytest.approx(ref, rel=1e-13)


def test_best_constant_worked_value():
    # alpha=1, beta=2, p=N=2: 2^{-3/2} (2 pi)^{-1/2}
    assert hyper_best_constant(1.0, 2.0, 2.0, 2.0, 1.0) == pytest.approx(1 / (4 * math.sqrt(math.pi)), rel=1e-12)


@pytest.mark.parametrize("alpha, beta, p, N", [(1.0, 2.0, 2.0, 2.0), (0.5, 3.0, 1.5, 3.0)])
def test_halving_avr_scales_best_constant(alpha, beta, p, N):
    ratio = hyper_best_constant(alpha, beta, p, N, 0.5) / hyper_best_constant(alpha, beta, p, N, 1.0)
    assert ratio == pytest.approx(2 ** ((beta - alpha) / (alpha * beta)), rel=1e-12)


def test_gaussian_exponent_worked_value():
    assert gaussian_hyper_exponent(1.0, 1.0, 0.3 * math.e, 0.3) == pytest.approx(0.5, rel=1e-14)


def test_log_ratio_limit_value_and_derivative():
    # N y ((p-2) log a - p) / (a^2 p) at a=1, y=1, p=N=2 is -2
    assert log_ratio_limit(1.0, 1.0, 2.0, 2.0) == pytest.approx(-2.0)
    for alpha, y, p, N in [(1.0, 1.0, 2.0, 2.0), (0.7, 2.0, 3.0, 2.5)]:
        ts = np.array([1e-3, 5e-4])
        q = np.array([log_alpha_beta_factor(alpha, alpha + y * t, p, N) / t for t in ts])
        # first-order extrapolation in t
        assert 2 * q[1] - q[0] == pytest.approx(log_ratio_limit(alpha, y, p, N), rel=1e-5)
    assert math.exp(log_ratio_limit(1.0, 1.0, 2.0, 2.0)) == pytest.approx(math.exp(-2.0))


def test_angle_deficit_ball_volume():
    assert ball_volume(angle_deficit_cone(2.0, 0.5), 2.0) == pytest.approx(2 * math.pi)
    assert ball_volume(model_cone(2.0), 1.0) == pytest.approx(math.pi)
    assert ball_volume(angle_deficit_cone(2.0, 0.25), 2.0) == pytest.approx(math.pi)


def test_euclidean_gaussian_integral():
    for n in (2.0, 3.0, 4.0):
        assert gaussian_G(euclidean(n)) == pytest.approx((2 * math.pi) ** (n / 2), rel=1e-12)


def test_zero_function_has_zero_norm():
    u = radial(lambda r: np.zeros_like(np.asarray(r, dtype=float)), 5.0)
    assert lp_norm(u, 2.0, model_cone(2.0)) == 0.0


def test_entropy_scaling_identity():
    space = model_cone(2.0)
    u = radial(lambda r: np.exp(-np.asarray(r, dtype=float) ** 2), 8.0)
    p, c = 2.0, 3.0
    cu = radial(lambda r: c * np.exp(-np.asarray(r, dtype=float) ** 2), 8.0)
    expect = c**p * entropy(u, p, space) + c**p * math.log(c**p) * lp_norm(u, p, space) ** p
    assert entropy(cu, p, space) == pytest.approx(expect, rel=1e-10)


def test_slope_of_linear_function():
    u = radial(lambda r: 3 * np.asarray(r, dtype=float), 2.0, n=21)
    assert all(slope(u, i) == pytest.approx(3.0) for i in range(1, 20))


def test_distribution_of_exponential():
    u = radial(lambda r: np.exp(-np.asarray(r, dtype=float)), 60.0)
    prof = distribution(u, model_cone(2.0), [math.exp(-1.0)])
    assert prof.superlevel_measures[0] == pytest.approx(math.pi, rel=1e-10)


def test_indicator_rearranges_to_ball():
    # annulus 1 < r < 2 in the plane has measure 3 pi, the ball of radius sqrt(3)
    f = lambda r: ((np.asarray(r) > 1.0) & (np.asarray(r) < 2.0)).astype(float)
    u = radial(f, 4.0, n=4001, breakpoints=(1.0, 2.0))
    star = rearrangement(u, model_cone(2.0))
    assert star(1.6) == pytest.approx(1.0)
    assert star(1.9) == pytest.approx(0.0, abs=1e-12)
    prof = distribution(star, model_cone(2.0), [0.5])
    assert prof.superlevel_measures[0] == pytest.approx(3 * math.pi, rel=1e-3)


def test_hopf_lax_three_point_grid():
    u = RadialFunction([0.0, 1.0, 2.0], [0.0, 10.0, 0.0])
    res = hopf_lax_transform(u, 0.5, 2.0, candidates=u.grid, extend=False)
    assert res.values[1] == pytest.approx(1.0)


def test_hopf_lax_of_constant_and_hj():
    u = radial(lambda r: np.full_like(np.asarray(r, dtype=float), 2.5), 5.0, derivative=lambda r: np.zeros_like(np.asarray(r, dtype=float)))
    res = hopf_lax_transform(u, 0.3, 2.0)
    np.testing.assert_allclose(res.values, 2.5)
    rep = hj_check(u, HopfLaxParams(2.0, 0.3, 1.0))
    assert rep.passed and abs(rep.lhs) < 1e-12 and abs(rep.rhs) < 1e-12


@pytest.mark.parametrize("t0, valid", [(0.4, True), (0.6, False)])
def test_class_threshold_for_quadratic_well(t0, valid):
    u = radial(lambda r: -np.asarray(r, dtype=float) ** 2, 10.0, derivative=lambda r: -2 * np.asarray(r, dtype=float))
    cert = validate_class(u, HopfLaxParams(2.0, 0.2, t0), 0.0, 1.0)
    assert cert.valid is valid


def test_metric_inequality_equality_on_segment():
    # y splits [x, z] in the ratio t : s
    x, z, t, s = 0.0, 1.0, 0.3, 0.7
    y = t / (t + s)
    lhs = abs(x - z) ** 2 / (t + s)
    rhs = abs(x - y) ** 2 / t + abs(y - z) ** 2 / s
    assert lhs == pytest.approx(rhs)
    assert metric_inequality_check(x, y, z, t, s, 2.0)
    assert metric_inequality_check(1.0, 5.0, 1.0, 0.2, 0.4, 3.0)


def test_one_dimensional_lsi_is_scale_invariant():
    p, N, lam = 2.0, 2.0, 1.7
    v = bump(1.0)
    # the verifier normalizes, so the lam^{N/p} factor can be dropped
    vl = bump(1.0 / lam)
    d0 = onedim_lsi_verify(v, p, N).deficit
    d1 = onedim_lsi_verify(vl, p, N).deficit
    assert d0 > 0
    assert d1 == pytest.approx(d0, abs=1e-7 * max(1.0, abs(d0)))


@pytest.mark.parametrize("N, avr", [(2.0, 1.0), (3.0, 0.4)])
def test_optimal_y_for_gaussian_weight(N, avr):
    # Ch(w) = N/2 for normalized e^{-r^2/2}, so y* = 2 for every alpha
    space = model_cone(N) if avr == 1.0 else angle_deficit_cone(N, avr)
    for alpha in (0.5, 1.0, 2.0):
        assert optimal_y(2.0, N, space, alpha) == pytest.approx(2.0, rel=1e-8)
