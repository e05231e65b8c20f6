import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from logsob.calculus import RadialFunction
from logsob.constants import conjugate, corrupted_lsc, lsc_constant
from logsob.families import bump, exp_decay, gaussian, gaussian_extremal, hyper_class_battery
from logsob.hopf_lax import ClassViolationError
from logsob.inequalities import (
    f_asymptotics,
    gaussian_G,
    gaussian_hyper_verify,
    gaussian_lsi_verify,
    gaussian_moments,
    gaussian_sharpness_sweep,
    hyper_sharpness_probe,
    hypercontractivity_verify,
    implied_lsi_constant,
    isoperimetry_verify,
    lsi_gaussian_identity,
    lsi_sharpness_sweep,
    lsi_verify,
    onedim_lsi_verify,
)
from logsob.spaces import angle_deficit_cone, euclidean, model_cone, synthetic_theta_profile


@pytest.mark.parametrize("p, N", [(2.0, 2.0), (1.5, 3.0), (3.0, 2.5), (2.0, 5.0)])
def test_extremal_saturates_one_dimensional_lsi(p, N):
    rep = onedim_lsi_verify(gaussian_extremal(p, N), p, N)
    assert rep.passed
    assert abs(rep.deficit) < 1e-10 * max(1.0, abs(rep.rhs))


@pytest.mark.parametrize("u", [exp_decay(1.0), bump(1.0), gaussian(2.0, 3.0)])
@pytest.mark.parametrize("avr", [1.0, 0.4])
def test_lsi_holds_with_slack(u, avr):
    rep = lsi_verify(u, 2.0, angle_deficit_cone(3.0, avr))
    assert rep.passed and rep.deficit > 0


def test_lsi_rearrangement_route_agrees_for_monotone_input():
    rep = lsi_verify(exp_decay(1.0), 2.0, angle_deficit_cone(2.5, 0.5))
    assert rep.params["route_gap"] < 1e-8
    assert rep.params["polya_szego_slack"] > -1e-8


def test_corrupted_constant_is_detected():
    with corrupted_lsc(0.5):
        rep = onedim_lsi_verify(gaussian_extremal(2.0, 3.0), 2.0, 3.0)
    assert not rep.passed


@given(st.floats(1.2, 4.0), st.floats(1.5, 8.0), st.floats(0.05, 1.0))
@settings(max_examples=40)
def test_gaussian_identity_is_exact_at_sharp_constant(p, N, avr):
    lhs, rhs = lsi_gaussian_identity(p, N, avr, lsc_constant(p, N) * avr ** (-p / N))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("p, N", [(2.0, 2.0), (1.5, 3.0), (3.0, 5.0)])
def test_implied_constant_of_unit_weight_is_sharp(p, N):
    assert implied_lsi_constant(p, N, lambda s: np.ones_like(np.asarray(s, dtype=float))) == pytest.approx(lsc_constant(p, N), rel=1e-10)


def test_sweep_on_cone_is_flat():
    sw = lsi_sharpness_sweep(2.0, 3.0, angle_deficit_cone(3.0, 0.5), [1.0, 0.5, 0.25])
    np.testing.assert_allclose(sw.implied_values, sw.target, rtol=1e-10)
    assert sw.limit_estimate == pytest.approx(sw.target, rel=1e-9)


def test_synthetic_sweep_approaches_target():
    prof = synthetic_theta_profile(0.5, scale=1.0)
    sw = lsi_sharpness_sweep(2.0, 3.0, angle_deficit_cone(3.0, 0.5), np.geomspace(1.0, 1e-3, 8), theta_plus=prof)
    assert sw.extras["synthetic"]
    assert sw.limit_estimate == pytest.approx(sw.target, rel=1e-2)


def test_sweep_rejects_unsorted_lambdas():
    with pytest.raises(ValueError):
        lsi_sharpness_sweep(2.0, 3.0, model_cone(3.0), [0.1, 1.0])


@pytest.mark.parametrize("space", [euclidean(2.0), angle_deficit_cone(3.0, 0.3), angle_deficit_cone(2.5, 1.0)])
def test_balls_are_isoperimetric(space):
    rep = isoperimetry_verify(space, np.geomspace(0.01, 100, 9))
    assert rep.passed and rep.params["max_relative_gap"] < 1e-12


def test_annulus_has_strict_slack():
    rep = isoperimetry_verify(angle_deficit_cone(3.0, 0.5), [0.5, 1.0, 2.0], annulus=True)
    assert rep.passed and rep.params["min_relative_slack"] > 0.1


@pytest.mark.parametrize("N, avr", [(2.0, 1.0), (3.0, 0.5), (2.5, 0.8)])
def test_gaussian_G_closed_form_against_quadrature(N, avr):
    s = angle_deficit_cone(N, avr)
    assert gaussian_G(s, numeric=True) == pytest.approx(gaussian_G(s), rel=1e-12)


def test_gaussian_moments_against_quad():
    s = angle_deficit_cone(3.0, 0.5)
    f, S = gaussian_moments(s, 0.3)
    fq, _ = integrate.quad(lambda r: math.exp(-0.3 * r * r) * float(s.weight(r)), 0, np.inf)
    Sq, _ = integrate.quad(lambda r: r * r * math.exp(-0.3 * r * r) * float(s.weight(r)), 0, np.inf)
    assert f == pytest.approx(fq, rel=1e-10)
    assert S == pytest.approx(Sq, rel=1e-10)


def test_f_asymptotics_on_cone():
    d = f_asymptotics(angle_deficit_cone(3.0, 0.5), 1e-3)
    assert d["scaled_f"] == pytest.approx(d["f_limit"], rel=1e-10)
    assert d["scaled_second_moment"] == pytest.approx(d["second_moment_limit"], rel=1e-10)


def test_gaussian_lsi_constant_function_is_equality():
    r = np.linspace(0, 14, 64)
    one = RadialFunction.from_callable(lambda x: np.ones_like(np.asarray(x, dtype=float)), r, derivative=lambda x: np.zeros_like(np.asarray(x, dtype=float)))
    rep = gaussian_lsi_verify(one, angle_deficit_cone(3.0, 0.5))
    assert rep.passed and abs(rep.deficit) < 1e-12


@pytest.mark.parametrize("u", [exp_decay(1.0), bump(1.0), gaussian(0.5, 2.0)])
def test_gaussian_lsi_holds(u):
    rep = gaussian_lsi_verify(u, angle_deficit_cone(2.0, 0.6))
    assert rep.passed and rep.deficit > 0


def test_gaussian_sweep_detects_small_constant():
    s = angle_deficit_cone(3.0, 0.5)
    lam = np.geomspace(0.1, 1e-4, 12)
    good = gaussian_sharpness_sweep(s, lam, 2.0)
    bad = gaussian_sharpness_sweep(s, lam, 1.9)
    assert not good.extras["violated"]
    assert bad.extras["violated"]
    assert bad.limit_estimate == pytest.approx(0.25 * 3.0 * (0.95 - 1.0), rel=1e-2)
    with pytest.raises(ValueError):
        gaussian_sharpness_sweep(s, lam, 5.0)


def test_gaussian_hyper_at_zero_time_is_equality():
    rep = gaussian_hyper_verify(exp_decay(1.0), angle_deficit_cone(2.0, 0.5), 1.0, 0.0)
    assert abs(rep.deficit) < 1e-12


@pytest.mark.parametrize("alpha, t", [(1.0, 0.5), (2.0, 1.0)])
def test_gaussian_hyper_holds(alpha, t):
    rep = gaussian_hyper_verify(bump(1.5), angle_deficit_cone(3.0, 0.7), alpha, t)
    assert rep.passed


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("index", [0, 5, 7])
def test_hypercontractivity_holds_on_class(p, index):
    m = hyper_class_battery(p, 1.0, 0.5)[index]
    rep = hypercontractivity_verify(m.u, p, 1.0, 2.0, 0.25, 0.5, angle_deficit_cone(3.0, 0.5), m.M, m.C0)
    assert rep.passed and rep.deficit > 0


def test_hypercontractivity_rejects_class_violation():
    r = np.linspace(0, 10, 256)
    u = RadialFunction.from_callable(lambda x: -np.asarray(x, dtype=float) ** 2, r, derivative=lambda x: -2 * np.asarray(x, dtype=float))
    with pytest.raises(ClassViolationError):
        hypercontractivity_verify(u, 2.0, 1.0, 2.0, 0.25, 0.5, model_cone(2.0))


@pytest.mark.slow
def test_hyper_probe_converges_to_sharp_constant():
    sw = hyper_sharpness_probe(2.0, 3.0, model_cone(3.0), 1.0, None, [0.04, 0.02, 0.01])
    assert sw.limit_estimate == pytest.approx(sw.target, rel=1e-2)


@pytest.mark.parametrize("avr", [1.0, 0.4])
def test_gaussian_is_extremal_on_cones(avr):
    rep = lsi_verify(gaussian(2.0, 2.0), 2.0, angle_deficit_cone(3.0, avr))
    assert rep.passed and abs(rep.deficit) < 1e-10
