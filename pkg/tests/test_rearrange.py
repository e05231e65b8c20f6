import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logsob.calculus import RadialFunction, cheeger_energy, lp_norm
from logsob.families import bump, exp_decay, gaussian, random_monotone_profile, random_profile
from logsob.rearrange import InfiniteMeasureError, bracketed_roots, distribution, polya_szego_check, rearrangement
from logsob.spaces import angle_deficit_cone, ball_volume, model_cone


def sampled_measure(u, space, levels, n=400001):
    """m({u > t}) by summing the weight over a fine midpoint grid."""
    r = np.linspace(0.0, u.r_max, n)
    mid = 0.5 * (r[1:] + r[:-1])
    shell = ball_volume(space, r[1:]) - ball_volume(space, r[:-1])
    vals = u(mid)
    return np.array([shell[vals > t].sum() for t in levels])


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_distribution_against_sampling(seed):
    u = random_profile(np.random.default_rng(seed))
    s = angle_deficit_cone(2.5, 0.6)
    levels = np.linspace(0.05, 0.9 * u.values.max(), 7)
    prof = distribution(u, s, levels)
    expected = sampled_measure(u, s, prof.thresholds)
    np.testing.assert_allclose(prof.superlevel_measures, expected, rtol=1e-4, atol=1e-6)


def test_distribution_of_monotone_profile_is_ball():
    s = model_cone(3.0)
    u = exp_decay(1.0)
    t = np.array([0.5, 0.1])
    prof = distribution(u, s, t)
    np.testing.assert_allclose(prof.superlevel_measures, ball_volume(s, -np.log(t)), rtol=1e-12)


def test_distribution_rejects_negative_levels():
    with pytest.raises(ValueError):
        distribution(exp_decay(1.0), model_cone(2.0), [-0.1])


@pytest.mark.parametrize("seed", range(4))
def test_rearrangement_is_nonincreasing_and_equimeasurable(seed):
    rng = np.random.default_rng(100 + seed)
    u = random_profile(rng)
    s = angle_deficit_cone(2.0, 0.5)
    uh = rearrangement(u, s)
    assert uh.nonincreasing
    assert np.all(np.diff(uh.values) <= 1e-14)
    cone = model_cone(2.0)
    levels = np.linspace(0.05, 0.95, 6) * float(uh.values[0])
    a = distribution(u, s, levels).superlevel_measures
    b = distribution(uh, cone, levels).superlevel_measures
    np.testing.assert_allclose(a, b, rtol=1e-8)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_rearrangement_preserves_lp_norm(p):
    u = random_profile(np.random.default_rng(7))
    s = angle_deficit_cone(3.0, 0.7)
    uh = rearrangement(u, s)
    assert lp_norm(uh, p, model_cone(3.0)) == pytest.approx(lp_norm(u, p, s), rel=1e-8)


def test_monotone_input_on_cone_is_fixed():
    s = model_cone(2.5)
    u = gaussian(1.0, 2.0)
    uh = rearrangement(u, s)
    r = np.linspace(0.0, 5.0, 11)
    np.testing.assert_allclose(uh(r), u(r), rtol=1e-9, atol=1e-14)


def test_angle_deficit_dilates_radius():
    # on a cone with avr a, u-hat(y) = u(a^{-1/N} y) for monotone u
    N, a = 2.0, 0.25
    u = exp_decay(1.0)
    uh = rearrangement(u, angle_deficit_cone(N, a))
    y = np.array([0.2, 0.7, 1.5])
    np.testing.assert_allclose(uh(y), u(a ** (-1 / N) * y), rtol=1e-9)


@pytest.mark.parametrize("seed", range(3))
def test_polya_szego(seed):
    u = random_monotone_profile(np.random.default_rng(seed)) if seed == 0 else random_profile(np.random.default_rng(seed))
    s = angle_deficit_cone(2.5, 0.5)
    rep = polya_szego_check(u, 2.0, s)
    assert rep.passed and rep.deficit >= -rep.tolerance


def test_bump_energy_decreases():
    s = model_cone(3.0)
    u = bump(1.0)
    uh = rearrangement(u, s)
    assert cheeger_energy(uh, 2.0, s) == pytest.approx(cheeger_energy(u, 2.0, s), rel=1e-6)


def test_non_decaying_function_has_infinite_measure():
    r = np.linspace(0, 5, 64)
    u = RadialFunction.from_callable(lambda x: np.ones_like(np.asarray(x, dtype=float)), r, derivative=lambda x: 0 * np.asarray(x))
    with pytest.raises(InfiniteMeasureError):
        distribution(u, model_cone(2.0), [0.5])


@given(st.floats(min_value=-3.0, max_value=3.0))
def test_bracketed_roots_finds_cubic_root(shift):
    f = lambda x, idx=None: x**3 - shift
    a, b = np.array([-4.0]), np.array([4.0])
    root = bracketed_roots(f, a, b, f(a), f(b))
    assert root[0] == pytest.approx(math.copysign(abs(shift) ** (1 / 3), shift), abs=1e-10)
