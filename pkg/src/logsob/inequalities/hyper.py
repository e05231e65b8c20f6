"""Hopf-Lax hypercontractivity: the verifier and the small-time sharpness probe."""
from __future__ import annotations

import dataclasses
import math
from typing import Optional, Tuple

import numpy as np

from ..calculus import DEFAULT_SPEC, QuadratureSpec, RadialFunction, cheeger_energy, integrate_weighted, lp_norm
from ..constants import conjugate, log_alpha_beta_factor, log_hyper_prefactor, log_lsc_constant
from ..hopf_lax import ClassViolationError, HopfLaxParams, growth_scan, hopf_lax_function, validate_class
from ..reports import SweepResult, VerificationReport, richardson_limit
from ..spaces import SpaceDescriptor
from ._common import check_decreasing, family_of, scaled


def log_exp_norm(f, a: float, space: SpaceDescriptor, spec: QuadratureSpec = DEFAULT_SPEC, weight=None) -> float:
    """log ||e^f||_{L^a}, optionally against ``weight(r) dm``."""
    if weight is None:
        g = lambda r: np.exp(a * np.asarray(f(r), dtype=float))
    else:
        g = lambda r: weight(r) * np.exp(a * np.asarray(f(r), dtype=float))
    R = spec.truncation_radius
    if R is None and isinstance(f, RadialFunction):
        spec = dataclasses.replace(spec, truncation_radius=f.r_max, breakpoints=spec.breakpoints + f.breakpoints)
    mass = integrate_weighted(g, space, spec)
    if not mass > 0:
        raise ValueError("exponential moment vanishes")
    return math.log(mass) / a


def infer_growth(u: RadialFunction, params: HopfLaxParams, C0: Optional[float] = None) -> Tuple[float, float]:
    """A growth pair (M, C0) with u >= M - r^{p'}/C0, or M = -inf if none is visible.

    C0 defaults to just above the admissibility threshold p' t0^{p'-1}, which
    gives the weakest growth requirement.
    """
    pc = params.p_conj
    if C0 is None:
        C0 = 1.001 * pc * params.t0 ** (pc - 1.0)
    r = growth_scan(u, pc)
    vals = u(r) if u.evaluator is not None else u.values
    h = vals + r**pc / C0
    k = int(np.argmin(h))
    if k == r.size - 1 and r.size > 1 and h[-1] < h[-2]:
        return -math.inf, C0
    return float(h[k]), float(C0)


def certify(u: RadialFunction, params: HopfLaxParams, M=None, C0=None):
    if M is None:
        M, C0 = infer_growth(u, params, C0)
    cert = validate_class(u, params, M if math.isfinite(M) else 0.0, C0)
    if not math.isfinite(M):
        cert = dataclasses.replace(cert, growth_M=M, growth_ok=False)
    if not cert.valid:
        raise ClassViolationError(cert)
    return cert


def hypercontractivity_verify(
    u: RadialFunction,
    p: float,
    alpha: float,
    beta: float,
    t: float,
    t0: float,
    space: SpaceDescriptor,
    M: Optional[float] = None,
    C0: Optional[float] = None,
    spec: QuadratureSpec = DEFAULT_SPEC,
    tolerance: Optional[float] = None,
) -> VerificationReport:
    """||e^{Q_t u}||_beta <= ||e^u||_alpha * prefactor(alpha, beta, p, N, avr, t).

    Both sides are compared in log form. Raises :class:`ClassViolationError`
    when ``u`` is outside the admissible class for ``t0``.
    """
    pc = conjugate(p)
    params = HopfLaxParams(pc, t, t0)
    cert = certify(u, params, M, C0)
    q = hopf_lax_function(u, t, pc)
    lhs = log_exp_norm(q, beta, space, spec)
    base = log_exp_norm(u, alpha, space, spec)
    log_pref = log_hyper_prefactor(alpha, beta, p, space.N, space.avr_param, t)
    rhs = base + log_pref
    return VerificationReport.build(
        "hypercontractivity",
        lhs,
        rhs,
        tolerance=tolerance,
        params={
            "space": space.label(),
            "p": p,
            "N": space.N,
            "avr": space.avr_param,
            "alpha": alpha,
            "beta": beta,
            "t": t,
            "t0": t0,
            "M": cert.growth_M,
            "C0": cert.growth_C0,
            "log_prefactor": log_pref,
            "scale": "log",
        },
        provenance=f"{space.label()} family={family_of(u)} n={u.grid.size} panels={spec.panels}",
    )


def log_ratio_limit(alpha: float, y: float, p: float, N: float) -> float:
    """lim_{t->0} (1/t) log of the alpha-beta power factor along beta = alpha + y t."""
    return N * y * ((p - 2.0) * math.log(alpha) - p) / (alpha**2 * p)


def _gaussian_class_member(p: float, alpha: float, r_max: float, n: int = 2048) -> RadialFunction:
    pc = conjugate(p)
    u = RadialFunction.from_callable(
        lambda r: -np.asarray(r, dtype=float) ** pc / alpha,
        np.linspace(0.0, r_max, n),
        derivative=lambda r: -(pc / alpha) * np.asarray(r, dtype=float) ** (pc - 1.0),
    )
    u.family = "gaussian-exponent"
    return u


def optimal_y(p: float, N: float, space: SpaceDescriptor, alpha: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """y* = (alpha^2/N)(p/alpha)^p Ch_p(w), with w the L^p-normalized exp(alpha u / p)."""
    pc = conjugate(p)
    R = 80.0 ** (1.0 / pc)
    w = RadialFunction.from_callable(
        lambda r: np.exp(-np.asarray(r, dtype=float) ** pc / p),
        np.linspace(0.0, R, 1024),
        derivative=lambda r: -(1.0 / (p - 1.0)) * np.asarray(r, dtype=float) ** (pc - 1.0) * np.exp(-np.asarray(r, dtype=float) ** pc / p),
    )
    w = scaled(w, 1.0 / lp_norm(w, p, space, spec))
    return (alpha**2 / N) * (p / alpha) ** p * cheeger_energy(w, p, space, spec)


def hyper_sharpness_probe(
    p: float,
    N: float,
    space: SpaceDescriptor,
    alpha: float,
    y: Optional[float],
    t_values,
    trial_constant: Optional[float] = None,
) -> SweepResult:
    """Constants implied by the hypercontractivity bound along beta(t) = alpha + y t.

    The test function is u = -r^{p'}/alpha, so that exp(alpha u / p) is the
    Gaussian extremal profile. For each t the bound is solved for the
    log-Sobolev constant it would need; at y = y* (pass ``y=None``) these
    values converge to L_{p,N} avr^{-p/N} as t -> 0. With ``trial_constant``
    the probe lists the times at which that constant is too small.
    """
    if space.N != N:
        raise ValueError("space dimension does not match N")
    ts = check_decreasing(t_values, "t_values")
    pc = conjugate(p)
    avr = space.avr_param
    y_star = optimal_y(p, N, space, alpha)
    if y is None:
        y = y_star
    if not y > 0:
        raise ValueError("y must be > 0")
    # u is admissible for t0 below (alpha / p')^{1/(p'-1)}
    t0_max = (alpha / pc) ** (1.0 / (pc - 1.0))
    if ts[0] >= t0_max:
        raise ValueError(f"t_values must stay below {t0_max:g} for this test function")
    # e^{alpha u} = e^{-r^{p'}} and Q_t u <= u
    r_max = 80.0 ** (1.0 / pc)
    u = _gaussian_class_member(p, alpha, r_max)
    spec = QuadratureSpec(truncation_radius=r_max, panels=96)
    base = log_exp_norm(u, alpha, space, spec)
    log_K = math.log(N) + (p - 1.0) - p * math.log(p)
    implied = []
    lhs_rates = []
    for t in ts:
        beta = alpha + y * t
        q = hopf_lax_function(u, t, pc)
        rate = (log_exp_norm(q, beta, space, spec) - base) / t
        lhs_rates.append(rate)
        log_ratio = log_alpha_beta_factor(alpha, beta, p, N)
        expo = p * alpha * beta / (N * y)
        implied.append(math.exp((rate - log_ratio / t) * expo - math.log(y) - log_K))
    implied = np.array(implied)
    target = math.exp(log_lsc_constant(p, N)) * avr ** (-p / N)
    extras = {
        "p": p,
        "N": N,
        "avr": avr,
        "alpha": alpha,
        "y": y,
        "y_star": y_star,
        "log_ratio_limit": log_ratio_limit(alpha, y, p, N),
        "lhs_rates": lhs_rates,
        "space": space.label(),
    }
    if trial_constant is not None:
        viol = ts[implied > trial_constant]
        extras["trial_constant"] = trial_constant
        extras["violations"] = viol.tolist()
    return SweepResult(ts, implied, richardson_limit(ts, implied), target, label="hyper-sharpness", extras=extras)
