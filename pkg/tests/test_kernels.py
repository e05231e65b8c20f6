import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from logsob import _hopflax_py, _kernels


def naive(y, u, x, pc, denom):
    cost = np.abs(x[:, None] - y[None, :]) ** pc / denom
    tot = u[None, :] + cost
    return tot.min(axis=1)


BACKENDS = sorted(_kernels.BACKENDS.items())


def test_backend_selected():
    assert _kernels.BACKEND in ("cython", "python")
    assert "python" in _kernels.BACKENDS


@pytest.mark.parametrize("name, mod", BACKENDS)
@pytest.mark.parametrize("pc", [1.3, 1.5, 2.0, 3.0])
def test_kernels_match_naive(name, mod, pc, rng):
    y = np.sort(rng.uniform(0, 10, 257))
    u = rng.normal(size=257)
    x = np.sort(rng.uniform(-1, 11, 199))
    denom = pc * 0.3 ** (pc - 1)
    expected = naive(y, u, x, pc, denom)
    v, _ = mod.brute(y, u, x, pc, denom)
    np.testing.assert_allclose(v, expected, atol=1e-12)
    if pc == 2.0:
        v, idx = mod.envelope_p2(y, u, x, denom)
    else:
        v, idx = mod.monotone_dc(y, u, x, pc, denom)
    np.testing.assert_allclose(v, expected, atol=1e-12)
    np.testing.assert_allclose(u[idx] + np.abs(x - y[idx]) ** pc / denom, v, atol=1e-12)


@given(arrays(np.float64, st.integers(2, 40), elements=st.floats(-5, 5)), st.sampled_from([1.5, 2.0, 2.5]))
@settings(max_examples=60, deadline=None)
def test_backends_agree(u, pc):
    y = np.linspace(0, 3, u.size)
    x = np.linspace(0, 3, 17)
    ref, _ = _hopflax_py.brute(y, u, x, pc, 1.0)
    for _, mod in BACKENDS:
        fast = mod.envelope_p2(y, u, x, 1.0)[0] if pc == 2.0 else mod.monotone_dc(y, u, x, pc, 1.0)[0]
        np.testing.assert_allclose(fast, ref, atol=1e-12)
