import math

import numpy as np
import pytest

from logsob.calculus import lp_norm
from logsob.families import (
    bump,
    exp_decay,
    gaussian,
    gaussian_extremal,
    hyper_class_battery,
    parse_family,
    random_monotone_profile,
    random_profile,
)
from logsob.spaces import model_cone


@pytest.mark.parametrize("u", [gaussian(1.0, 2.0), gaussian(2.0, 3.0), exp_decay(1.5), bump(1.0), bump(2.0)])
def test_analytic_derivatives(u):
    r = np.linspace(0.01, 0.99, 97) * u.r_max
    h = 1e-6
    fd = (u(r + h) - u(r - h)) / (2 * h)
    np.testing.assert_allclose(u.derivative(r), fd, rtol=0, atol=1e-6 * np.max(np.abs(fd)))


@pytest.mark.parametrize("p, N, lam", [(2.0, 2.0, 1.0), (1.5, 3.0, 0.5), (3.0, 2.5, 2.0)])
def test_extremal_is_normalized(p, N, lam):
    assert lp_norm(gaussian_extremal(p, N, lam), p, model_cone(N)) == pytest.approx(1.0, rel=1e-11)


def test_bump_apex_and_support():
    u = bump(2.0)
    assert u(0.0) == pytest.approx(1.0)
    assert u(2.0) == 0.0 and u(3.0) == 0.0
    assert u.breakpoints == (2.0,)


@pytest.mark.parametrize("text, family", [("gaussian:2", "gaussian:2"), ("EXP-DECAY:3", "exp-decay:3"), ("bump", "bump"), ("exp", "exp-decay:1")])
def test_parse_family(text, family):
    assert parse_family(text, 2.0).family == family


def test_parse_family_rejects_unknown():
    with pytest.raises(ValueError):
        parse_family("sinc", 2.0)


def test_random_profiles(rng):
    for _ in range(5):
        u = random_profile(rng)
        assert np.all(u.values >= 0)
        assert u.values[-1] == pytest.approx(0.0, abs=1e-12)
        v = random_monotone_profile(rng)
        assert np.all(np.diff(v.values) <= 0)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_class_growth_lower_bound(p):
    pc = p / (p - 1)
    for m in hyper_class_battery(p, 1.0, 0.5):
        r = np.linspace(0, 4 * m.u.r_max, 4001)
        assert np.all(m.u(r) >= m.M - r**pc / m.C0 - 1e-12), m.name
        assert m.C0 > pc * 0.5 ** (pc - 1)


def test_class_battery_size():
    assert len(hyper_class_battery(2.0, 1.0, 0.5)) == 10
