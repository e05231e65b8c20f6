"""Special functions and closed-form sharp constants.

Everything here is a pure function of its (real) arguments. Products of
powers are assembled in log-space and exponentiated once, so that large
``N`` or extreme ``alpha``/``beta`` do not overflow intermediate terms.
"""
from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass, field

# Lanczos coefficients for g = 7, n = 9 (double precision, ~1e-15 relative).
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# Test-only multiplicative corruption of L_{p,N}; see ``corrupted_lsc``.
_LSC_SCALE = 1.0


def _lanczos_lgamma(x: float) -> float:
    # valid for x >= 0.5
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * math.log(t) - t + math.log(acc)


def lgamma(x: float) -> float:
    """Natural log of the Gamma function for ``x > 0``."""
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise ValueError(f"gamma is only defined here for finite x > 0, got {x!r}")
    if x < 0.5:
        # reflection; sin(pi x) > 0 on (0, 0.5)
        return math.log(math.pi / math.sin(math.pi * x)) - _lanczos_lgamma(1.0 - x)
    return _lanczos_lgamma(x)


def gamma(x: float) -> float:
    """Euler's Gamma function on the positive half-line.

    Lanczos approximation (g = 7), relative error below 1e-13 on [0.5, 50].
    """
    return math.exp(lgamma(x))


def _check_gt_one(name: str, value: float) -> float:
    value = float(value)
    if not value > 1.0 or math.isinf(value):
        raise ValueError(f"{name} must be a finite number > 1, got {value!r}")
    return value


def log_sigma(N: float) -> float:
    N = _check_gt_one("N", N)
    return 0.5 * N * math.log(math.pi) - lgamma(0.5 * N + 1.0)


def sigma(N: float) -> float:
    """Volume of the unit ball in (real) dimension ``N``: pi^{N/2} / Gamma(N/2 + 1)."""
    return math.exp(log_sigma(N))


def conjugate(p: float) -> float:
    p = _check_gt_one("p", p)
    return p / (p - 1.0)


def log_lsc_constant(p: float, N: float) -> float:
    p = _check_gt_one("p", p)
    N = _check_gt_one("N", N)
    pc = p / (p - 1.0)
    return (
        math.log(p / N)
        + (p - 1.0) * (math.log(p - 1.0) - 1.0)
        - (p / N) * (log_sigma(N) + lgamma(N / pc + 1.0))
        + math.log(_LSC_SCALE)
    )


def lsc_constant(p: float, N: float) -> float:
    """Sharp L^p log-Sobolev constant L_{p,N} of the weighted half-line.

    L_{p,N} = (p/N) ((p-1)/e)^{p-1} (sigma_N Gamma(N/p' + 1))^{-p/N}
    """
    return math.exp(log_lsc_constant(p, N))


@contextlib.contextmanager
def corrupted_lsc(factor: float):
    """Temporarily multiply every L_{p,N} by ``factor`` (negative-control hook)."""
    global _LSC_SCALE
    previous = _LSC_SCALE
    _LSC_SCALE = previous * float(factor)
    try:
        yield
    finally:
        _LSC_SCALE = previous


def _check_hyper_args(alpha, beta, p, N, avr, t):
    alpha, beta, t, avr = float(alpha), float(beta), float(t), float(avr)
    if not alpha > 0.0:
        raise ValueError(f"alpha must be > 0, got {alpha!r}")
    if beta < alpha:
        raise ValueError(f"beta must be >= alpha, got beta={beta!r} < alpha={alpha!r}")
    if not t > 0.0:
        raise ValueError(f"t must be > 0, got {t!r}")
    if not 0.0 < avr <= 1.0:
        raise ValueError(f"avr must lie in (0, 1], got {avr!r}")
    return alpha, beta, _check_gt_one("p", p), _check_gt_one("N", N), avr, t


def log_alpha_beta_factor(alpha: float, beta: float, p: float, N: float) -> float:
    """log of alpha^{(N/ab)(a/p + b/p')} / beta^{(N/ab)(b/p + a/p')}."""
    pc = p / (p - 1.0)
    scale = N / (alpha * beta)
    return scale * (
        (alpha / p + beta / pc) * math.log(alpha) - (beta / p + alpha / pc) * math.log(beta)
    )


def log_hyper_prefactor(alpha, beta, p, N, avr, t) -> float:
    alpha, beta, p, N, avr, t = _check_hyper_args(alpha, beta, p, N, avr, t)
    if beta == alpha:
        return 0.0
    expo = (N / p) * (beta - alpha) / (alpha * beta)
    log_const = (
        log_lsc_constant(p, N)
        - (p / N) * math.log(avr)
        + math.log(N)
        + (p - 1.0)
        - p * math.log(p)
    )
    return (
        expo * (math.log(beta - alpha) - math.log(t))
        + log_alpha_beta_factor(alpha, beta, p, N)
        + expo * log_const
    )


def hyper_prefactor(alpha, beta, p, N, avr, t) -> float:
    """Full multiplicative factor on the right of the Hopf-Lax hypercontractivity bound.

    Returns exactly 1.0 when ``alpha == beta``.
    """
    return math.exp(log_hyper_prefactor(alpha, beta, p, N, avr, t))


def hyper_best_constant(alpha, beta, p, N, avr) -> float:
    """C_{alpha,beta,p,N,m}: the prefactor with the ((beta-alpha)/t)-power removed.

    Assembled from (avr sigma_N p'^{N/p'} Gamma(N/p'+1))^{(alpha-beta)/(alpha beta)},
    an independent parenthesization of the same constant used by
    :func:`hyper_prefactor`.
    """
    alpha, beta, p, N, avr, _ = _check_hyper_args(alpha, beta, p, N, avr, 1.0)
    pc = p / (p - 1.0)
    log_base = (
        math.log(avr) + log_sigma(N) + (N / pc) * math.log(pc) + lgamma(N / pc + 1.0)
    )
    return math.exp(
        log_alpha_beta_factor(alpha, beta, p, N)
        + (alpha - beta) / (alpha * beta) * log_base
    )


def gaussian_hyper_exponent(alpha: float, t: float, theta: float, avr: float) -> float:
    """H = t / (alpha (alpha + t)) * log(theta / avr) for the Gaussian-measure bound."""
    alpha, t, theta, avr = float(alpha), float(t), float(theta), float(avr)
    if not alpha > 0.0:
        raise ValueError(f"alpha must be > 0, got {alpha!r}")
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t!r}")
    if not 0.0 < avr <= 1.0:
        raise ValueError(f"avr must lie in (0, 1], got {avr!r}")
    if theta < avr:
        raise ValueError(
            f"theta={theta!r} < avr={avr!r} contradicts Bishop-Gromov (theta >= AVR)"
        )
    if math.isinf(theta):
        return math.inf if t > 0.0 else 0.0
    return t / (alpha * (alpha + t)) * math.log(theta / avr)


@dataclass(frozen=True)
class ExponentPair:
    """A Sobolev exponent ``p > 1`` with its Hoelder conjugate."""

    p: float
    p_conj: float = field(default=math.nan)

    def __post_init__(self):
        p = _check_gt_one("p", self.p)
        pc = p / (p - 1.0) if math.isnan(self.p_conj) else float(self.p_conj)
        if abs(1.0 / p + 1.0 / pc - 1.0) > 1e-14:
            raise ValueError(f"{pc!r} is not the conjugate exponent of {p!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "p_conj", pc)

    @classmethod
    def from_conjugate(cls, p_conj: float) -> "ExponentPair":
        pc = _check_gt_one("p_conj", p_conj)
        return cls(pc / (pc - 1.0), pc)


@dataclass(frozen=True)
class SharpConstantSet:
    N: float
    exponents: ExponentPair
    avr: float = 1.0
    sigma_N: float = field(init=False)
    L_pN: float = field(init=False)

    def __post_init__(self):
        _check_gt_one("N", self.N)
        if not 0.0 < self.avr <= 1.0:
            raise ValueError(f"avr must lie in (0, 1], got {self.avr!r}")
        object.__setattr__(self, "sigma_N", sigma(self.N))
        object.__setattr__(self, "L_pN", lsc_constant(self.exponents.p, self.N))

    @property
    def space_constant(self) -> float:
        """L_{p,N} avr^{-p/N}, the sharp constant on a space with this AVR."""
        return self.L_pN * self.avr ** (-self.exponents.p / self.N)
