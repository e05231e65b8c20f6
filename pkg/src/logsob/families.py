"""Named test-function families used by the verifiers, the CLI and the tests.

Every constructor returns a :class:`RadialFunction` with an exact evaluator
and analytic derivative, sampled on a grid long enough that the function
(or its relevant power) is negligible past the end.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .calculus import RadialFunction
from .constants import conjugate, lgamma, log_sigma

DEFAULT_POINTS = 1024


def _grid(r_max: float, n: int = DEFAULT_POINTS) -> np.ndarray:
    return np.linspace(0.0, r_max, n)


def gaussian_radius(lam: float, p: float, decades: float = 80.0) -> float:
    """Radius where e^{-lam r^{p'}} has dropped by ``e^-decades``."""
    return (decades / lam) ** (1.0 / conjugate(p))


def gaussian(lam: float, p: float, scale: float = 1.0, n: int = DEFAULT_POINTS) -> RadialFunction:
    """scale * exp(-lam r^{p'} / p)."""
    pc = conjugate(p)

    def f(r):
        return scale * np.exp(-lam * np.asarray(r, dtype=float) ** pc / p)

    def df(r):
        r = np.asarray(r, dtype=float)
        return -(lam / (p - 1.0)) * r ** (pc - 1.0) * f(r)

    u = RadialFunction.from_callable(f, _grid(gaussian_radius(lam, p), n), derivative=df)
    u.family = f"gaussian:{lam:g}"
    return u


def gaussian_extremal_coefficient(p: float, N: float, lam: float) -> float:
    pc = conjugate(p)
    return math.exp((N / (p * pc)) * math.log(lam) - (lgamma(N / pc + 1.0) + log_sigma(N)) / p)


def gaussian_extremal(p: float, N: float, lam: float = 1.0, n: int = DEFAULT_POINTS) -> RadialFunction:
    """The L^p-normalized extremal lam^{N/(p p')} (Gamma(N/p'+1) sigma_N)^{-1/p} e^{-lam r^{p'}/p}."""
    u = gaussian(lam, p, gaussian_extremal_coefficient(p, N, lam), n)
    u.family = f"gaussian-extremal:{lam:g}"
    return u


def exp_decay(a: float, n: int = DEFAULT_POINTS) -> RadialFunction:
    """exp(-a r)."""

    def f(r):
        return np.exp(-a * np.asarray(r, dtype=float))

    def df(r):
        return -a * f(r)

    u = RadialFunction.from_callable(f, _grid(80.0 / a, n), derivative=df)
    u.family = f"exp-decay:{a:g}"
    return u


def _bump_parts(x):
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1.0
    xi = np.where(inside, x, 0.0)
    q = 1.0 - xi * xi
    with np.errstate(over="ignore", divide="ignore"):
        e = np.where(inside, np.exp(1.0 - 1.0 / q), 0.0)
        de = np.where(inside, e * (-2.0 * xi / (q * q)), 0.0)
    return e, de


def bump(radius: float = 1.0, n: int = DEFAULT_POINTS) -> RadialFunction:
    """The smooth compactly supported bump e^{1 - 1/(1 - (r/R)^2)}, equal to 1 at the apex."""

    def f(r):
        return _bump_parts(np.asarray(r, dtype=float) / radius)[0]

    def df(r):
        return _bump_parts(np.asarray(r, dtype=float) / radius)[1] / radius

    u = RadialFunction.from_callable(f, _grid(radius, n), derivative=df, breakpoints=(radius,))
    u.family = "bump"
    return u


def parse_family(text: str, p: float) -> RadialFunction:
    """Resolve ``gaussian:LAM``, ``exp-decay:A`` or ``bump`` (case-insensitive)."""
    name, _, arg = text.strip().lower().partition(":")
    if name == "gaussian":
        return gaussian(float(arg or 1.0), p)
    if name in ("exp-decay", "exp"):
        return exp_decay(float(arg or 1.0))
    if name == "bump":
        return bump(float(arg) if arg else 1.0)
    raise ValueError(f"unknown function family {text!r}")


# --- randomized non-negative profiles for the rearrangement battery ---------


def random_profile(rng: np.random.Generator, n: int = 512, max_terms: int = 4) -> RadialFunction:
    """Random non-negative, compactly supported, piecewise-smooth radial function.

    A sum of smooth bumps and tent functions at random centers and widths;
    generally non-monotone with several local extrema. Tents contribute
    kinks, which are listed as breakpoints.
    """
    k = int(rng.integers(1, max_terms + 1))
    kinds = rng.integers(0, 2, size=k)  # 0 smooth bump, 1 tent
    centers = rng.uniform(0.0, 3.0, size=k)
    widths = rng.uniform(0.3, 1.5, size=k)
    heights = rng.uniform(0.2, 1.0, size=k)
    r_end = float(np.max(centers + widths))

    def parts(r):
        r = np.asarray(r, dtype=float)
        x = (r.reshape(-1)[None, :] - centers[:, None]) / widths[:, None]
        e, de = _bump_parts(x)
        tent = np.maximum(1.0 - np.abs(x), 0.0)
        dtent = np.where(np.abs(x) < 1.0, -np.sign(x), 0.0)
        sel = (kinds == 1)[:, None]
        val = np.where(sel, tent, e) * heights[:, None]
        der = np.where(sel, dtent, de) * (heights / widths)[:, None]
        return val.sum(axis=0).reshape(r.shape), der.sum(axis=0).reshape(r.shape)

    def f(r):
        return parts(r)[0]

    def df(r):
        return parts(r)[1]

    breaks = []
    for kind, c, w in zip(kinds, centers, widths):
        pts = (c - w, c, c + w) if kind == 1 else (c - w, c + w)
        breaks.extend(x for x in pts if 0.0 < x <= r_end)
    u = RadialFunction.from_callable(f, _grid(r_end, n), derivative=df, breakpoints=breaks)
    u.family = "random-profile"
    return u


def random_monotone_profile(rng: np.random.Generator, n: int = 512) -> RadialFunction:
    """Random non-increasing profile: a positive mix of decaying Gaussians."""
    k = int(rng.integers(1, 4))
    amps = rng.uniform(0.2, 1.0, size=k)
    rates = rng.uniform(0.3, 3.0, size=k)

    def f(r):
        r = np.asarray(r, dtype=float)
        return (amps[:, None] * np.exp(-rates[:, None] * r.reshape(-1)[None, :] ** 2)).sum(0).reshape(r.shape)

    def df(r):
        r = np.asarray(r, dtype=float)
        rr = r.reshape(-1)[None, :]
        return (-2.0 * amps[:, None] * rates[:, None] * rr * np.exp(-rates[:, None] * rr**2)).sum(0).reshape(r.shape)

    r_end = math.sqrt(80.0 / float(rates.min()))
    u = RadialFunction.from_callable(f, _grid(r_end, n), derivative=df)
    u.family = "random-monotone"
    return u


# --- the Hopf-Lax admissible class -----------------------------------------


@dataclass(frozen=True)
class ClassMember:
    """A function of the Hopf-Lax class together with its (A3) growth data."""

    name: str
    u: RadialFunction
    M: float
    C0: float


def _class_member(name, f, df, r_max, M, C0, n=2048) -> ClassMember:
    u = RadialFunction.from_callable(f, _grid(r_max, n), derivative=df)
    u.family = name
    return ClassMember(name, u, M, C0)


def hyper_class_battery(p: float, alpha: float, t0: float) -> List[ClassMember]:
    """Ten admissible functions for Hopf-Lax hypercontractivity checks.

    Each member satisfies u >= M - r^{p'}/C0 with C0 > p' t0^{p'-1}, has a
    bounded non-negativity set and e^{alpha u} integrable.
    """
    pc = conjugate(p)
    thr = pc * t0 ** (pc - 1.0)
    C0 = 1.5 * thr
    b = 1.0 / C0  # the steepest admissible r^{p'} coefficient
    members = []

    def reach(a, coeff, decades=60.0):
        # where alpha (a - coeff r^{p'}) < -decades
        return ((decades / alpha + max(a, 0.0) + 1.0) / coeff) ** (1.0 / pc)

    # pure power laws u = a - c r^{p'}
    for a, c in ((0.0, b), (0.5, 0.5 * b), (-0.3, 0.8 * b)):
        members.append(
            _class_member(
                f"power(a={a:g},c={c:.4g})",
                lambda r, a=a, c=c: a - c * np.asarray(r, dtype=float) ** pc,
                lambda r, c=c: -c * pc * np.asarray(r, dtype=float) ** (pc - 1.0),
                reach(a, c),
                a,
                C0,
            )
        )
    # power law plus linear decay
    c, k = 0.5 * b, 0.7
    members.append(
        _class_member(
            "power-linear",
            lambda r: 0.2 - c * np.asarray(r, dtype=float) ** pc - k * np.asarray(r, dtype=float),
            lambda r: -c * pc * np.asarray(r, dtype=float) ** (pc - 1.0) - k,
            reach(0.2, c),
            _linear_growth_M(0.2, k, c, C0, pc),
            C0,
        )
    )
    # smooth-at-apex variant u = a - c (1 + r^2)^{p'/2}
    members.append(
        _class_member(
            "japanese-bracket",
            lambda r: 1.0 - 0.5 * b * (1.0 + np.asarray(r, dtype=float) ** 2) ** (pc / 2.0),
            lambda r: -0.5 * b * pc * np.asarray(r, dtype=float) * (1.0 + np.asarray(r, dtype=float) ** 2) ** (pc / 2.0 - 1.0),
            reach(1.0, 0.5 * b),
            1.0 - 0.5 * b * max(1.0, 2.0 ** (pc / 2.0 - 1.0)),
            C0,
        )
    )
    # non-monotone: power law plus a bump
    for h, ctr in ((0.8, 1.0), (0.5, 2.0)):
        def f(r, h=h, ctr=ctr):
            r = np.asarray(r, dtype=float)
            return -0.5 * b * r**pc + h * np.exp(-((r - ctr) ** 2))

        def df(r, h=h, ctr=ctr):
            r = np.asarray(r, dtype=float)
            return -0.5 * b * pc * r ** (pc - 1.0) - 2.0 * h * (r - ctr) * np.exp(-((r - ctr) ** 2))

        members.append(_class_member(f"power-bump(h={h:g},c={ctr:g})", f, df, reach(h, 0.5 * b), 0.0, C0))
    # oscillating perturbation
    members.append(
        _class_member(
            "power-cosine",
            lambda r: -0.6 * b * np.asarray(r, dtype=float) ** pc + 0.3 * np.cos(2.0 * np.asarray(r, dtype=float)),
            lambda r: -0.6 * b * pc * np.asarray(r, dtype=float) ** (pc - 1.0) - 0.6 * np.sin(2.0 * np.asarray(r, dtype=float)),
            reach(0.3, 0.6 * b),
            -0.3,
            C0,
        )
    )
    # linear decay only (bounded growth from below by the r^{p'} term)
    members.append(
        _class_member(
            "linear",
            lambda r: -np.asarray(r, dtype=float),
            lambda r: -np.ones_like(np.asarray(r, dtype=float)),
            (60.0 / alpha + 1.0),
            _linear_growth_M(0.0, 1.0, 0.0, C0, pc),
            C0,
        )
    )
    # a plateau top smoothly joined to a power law
    members.append(
        _class_member(
            "plateau-power",
            lambda r: 0.3 - 0.4 * b * np.maximum(np.asarray(r, dtype=float) - 0.5, 0.0) ** pc,
            lambda r: -0.4 * b * pc * np.maximum(np.asarray(r, dtype=float) - 0.5, 0.0) ** (pc - 1.0),
            0.5 + reach(0.3, 0.4 * b),
            0.3,
            C0,
        )
    )
    return members


def _linear_growth_M(a, k, c, C0, pc):
    """A valid M for u = a - c r^{p'} - k r given the slack (1/C0 - c) r^{p'}."""
    slack = 1.0 / C0 - c
    if k == 0:
        return a
    # min over r of slack r^{p'} - k r
    r_star = (k / (slack * pc)) ** (1.0 / (pc - 1.0))
    return a + slack * r_star**pc - k * r_star
