"""Log-Sobolev and hypercontractivity for the Gaussian-weighted measure (p = 2)."""
from __future__ import annotations

import dataclasses
import math
from typing import Optional

import numpy as np

from ..calculus import QuadratureSpec, RadialFunction, integrate_weighted, xlogx
from ..constants import lgamma, log_sigma, gaussian_hyper_exponent
from ..hopf_lax import hopf_lax_function
from ..reports import SweepResult, VerificationReport, richardson_limit
from ..spaces import SpaceDescriptor, density_theta
from ._common import check_decreasing, family_of
from .hyper import log_exp_norm

GAUSSIAN_RADIUS = 14.0  # e^{-r^2/2} < 1e-42 beyond


def gaussian_G(space: SpaceDescriptor, numeric: bool = False, spec: Optional[QuadratureSpec] = None) -> float:
    """G = int e^{-d^2/2} dm; equals avr sigma_N 2^{N/2} Gamma(N/2+1) on cones.

    With ``numeric`` the layer-cake integral is evaluated by quadrature.
    """
    N = space.N
    if numeric:
        spec = spec or QuadratureSpec(truncation_radius=GAUSSIAN_RADIUS)
        return integrate_weighted(lambda r: np.exp(-0.5 * np.asarray(r, dtype=float) ** 2), space, spec)
    return math.exp(math.log(space.avr_param) + log_sigma(N) + 0.5 * N * math.log(2.0) + lgamma(0.5 * N + 1.0))


def _gaussian_spec(u: RadialFunction, spec: Optional[QuadratureSpec]) -> QuadratureSpec:
    spec = spec or QuadratureSpec()
    if spec.truncation_radius is not None:
        return spec
    R = GAUSSIAN_RADIUS if u.evaluator is not None else min(u.r_max, GAUSSIAN_RADIUS)
    return dataclasses.replace(spec, truncation_radius=R, breakpoints=spec.breakpoints + u.breakpoints)


def _density_term(space: SpaceDescriptor) -> float:
    d = density_theta(space)
    return math.log(d.theta_at_base / d.avr)


def gaussian_lsi_verify(
    u: RadialFunction,
    space: SpaceDescriptor,
    spec: Optional[QuadratureSpec] = None,
    tolerance: Optional[float] = None,
) -> VerificationReport:
    """int u^2 log u^2 dm_G <= 2 int |u'|^2 dm_G + log(theta/avr), dm_G = e^{-d^2/2} dm / G.

    ``u`` is rescaled to unit L^2(m_G) norm first.
    """
    spec = _gaussian_spec(u, spec)
    G = gaussian_G(space)

    def gw(r):
        return np.exp(-0.5 * np.asarray(r, dtype=float) ** 2) / G

    Z = integrate_weighted(lambda r: gw(r) * np.asarray(u(r), dtype=float) ** 2, space, spec)
    if not (math.isfinite(Z) and Z > 0):
        raise ValueError(f"cannot normalize in L^2(m_G): squared norm is {Z!r}")
    # for w = u / sqrt(Z): int w^2 log w^2 = (int u^2 log u^2) / Z - log Z
    ent = integrate_weighted(lambda r: gw(r) * xlogx(np.asarray(u(r), dtype=float) ** 2), space, spec)
    lhs = ent / Z - math.log(Z)
    energy = integrate_weighted(lambda r: gw(r) * np.asarray(u.derivative(r), dtype=float) ** 2, space, spec)
    extra = _density_term(space)
    rhs = 2.0 * energy / Z + extra
    return VerificationReport.build(
        "gaussian-lsi",
        lhs,
        rhs,
        tolerance=tolerance,
        params={"space": space.label(), "p": 2.0, "N": space.N, "avr": space.avr_param, "G": G, "density_term": extra},
        provenance=f"{space.label()} family={family_of(u)} R={spec.truncation_radius:g} panels={spec.panels}",
    )


def gaussian_moments(space: SpaceDescriptor, lam: float, spec: Optional[QuadratureSpec] = None):
    """f(lam) = int e^{-lam d^2} dm and S(lam) = int d^2 e^{-lam d^2} dm, by quadrature."""
    if not lam > 0:
        raise ValueError("lambda must be > 0")
    spec = spec or QuadratureSpec(truncation_radius=math.sqrt(45.0 / lam))
    f = integrate_weighted(lambda r: np.exp(-lam * np.asarray(r, dtype=float) ** 2), space, spec)
    S = integrate_weighted(
        lambda r: np.asarray(r, dtype=float) ** 2 * np.exp(-lam * np.asarray(r, dtype=float) ** 2), space, spec
    )
    return f, S


def f_asymptotics(space: SpaceDescriptor, lam: float) -> dict:
    """Scaled moments lam^{N/2} f and lam^{N/2+1} S next to their small-lambda limits."""
    N, avr = space.N, space.avr_param
    f, S = gaussian_moments(space, lam)
    return {
        "lambda": lam,
        "scaled_f": lam ** (0.5 * N) * f,
        "f_limit": math.pi ** (0.5 * N) * avr,
        "scaled_second_moment": lam ** (0.5 * N + 1.0) * S,
        "second_moment_limit": 0.5 * N * math.pi ** (0.5 * N) * avr,
    }


def gaussian_sharpness_sides(space: SpaceDescriptor, lam: float, trial_constant: float):
    """Both sides of the Gaussian inequality at u_lam = (G/f)^{1/2} e^{(1/4 - lam/2) d^2}.

    With C in place of 2: lhs = log(G/f) + (1/2 - lam) S/f and
    rhs = C (1/2 - lam)^2 S/f + log(theta/avr). u_lam itself overflows for small
    lam, so only the moments are evaluated.
    """
    G = gaussian_G(space)
    f, S = gaussian_moments(space, lam)
    a = 0.5 - lam
    lhs = math.log(G / f) + a * S / f
    rhs = trial_constant * a * a * S / f + _density_term(space)
    return lhs, rhs


def gaussian_sharpness_sweep(
    space: SpaceDescriptor,
    lambdas,
    trial_constant: float,
    tolerance: float = 1e-6,
) -> SweepResult:
    """lam (rhs - lhs) along u_lam as lam -> 0; the limit is (N/4)(C/2 - 1)."""
    if not 0.0 < trial_constant <= 4.0:
        raise ValueError("trial_constant must lie in (0, 4]")
    lam = check_decreasing(lambdas, "lambdas")
    vals = []
    for l in lam:
        lhs, rhs = gaussian_sharpness_sides(space, l, trial_constant)
        vals.append(l * (rhs - lhs))
    vals = np.array(vals)
    bad = lam[vals < -tolerance]
    N = space.N
    return SweepResult(
        lam,
        vals,
        richardson_limit(lam, vals),
        0.25 * N * (0.5 * trial_constant - 1.0),
        label="gaussian-sharpness",
        extras={
            "trial_constant": trial_constant,
            "space": space.label(),
            "N": N,
            "avr": space.avr_param,
            "tolerance": tolerance,
            "violated": bool(bad.size),
            "first_violation": float(bad.max()) if bad.size else None,
        },
    )


def gaussian_hyper_verify(
    u: RadialFunction,
    space: SpaceDescriptor,
    alpha: float,
    t: float,
    spec: Optional[QuadratureSpec] = None,
    tolerance: Optional[float] = None,
) -> VerificationReport:
    """||e^{Q_t u}||_{L^{alpha+t}(m_G)} <= e^H ||e^u||_{L^alpha(m_G)}, Q_t with cost d^2/(2t).

    Compared in log form; H = t/(alpha(alpha+t)) log(theta/avr).
    """
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    if t < 0:
        raise ValueError("t must be >= 0")
    spec = _gaussian_spec(u, spec)
    G = gaussian_G(space)

    def gw(r):
        return np.exp(-0.5 * np.asarray(r, dtype=float) ** 2) / G

    d = density_theta(space)
    H = gaussian_hyper_exponent(alpha, t, d.theta_at_base, d.avr)
    q = hopf_lax_function(u, t, 2.0) if t > 0 else u
    lhs = log_exp_norm(q, alpha + t, space, spec, weight=gw)
    rhs = H + log_exp_norm(u, alpha, space, spec, weight=gw)
    return VerificationReport.build(
        "gaussian-hyper",
        lhs,
        rhs,
        tolerance=tolerance,
        params={"space": space.label(), "p": 2.0, "N": space.N, "avr": space.avr_param, "alpha": alpha, "t": t, "H": H, "scale": "log"},
        provenance=f"{space.label()} family={family_of(u)} R={spec.truncation_radius:g} panels={spec.panels}",
    )
