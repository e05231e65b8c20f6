"""L^p log-Sobolev verifiers, the scaling sweep and the isoperimetric check."""
from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from ..calculus import DEFAULT_SPEC, QuadratureSpec, RadialFunction, cheeger_energy, entropy, integrate_weighted, lp_norm, xlogx
from ..constants import conjugate, lgamma, log_lsc_constant, log_sigma, lsc_constant
from ..rearrange import rearrangement
from ..reports import SweepResult, VerificationReport, richardson_limit
from ..spaces import SpaceDescriptor, ball_volume, minkowski_surface, model_cone
from ._common import check_decreasing, family_of, scaled


def normalized(u: RadialFunction, p: float, space: SpaceDescriptor, spec: QuadratureSpec = DEFAULT_SPEC):
    """u / ||u||_p over ``space`` together with the original norm."""
    norm = lp_norm(u, p, space, spec)
    if not (math.isfinite(norm) and norm > 0):
        raise ValueError(f"cannot normalize: L^{p:g} norm is {norm!r}")
    if abs(norm - 1.0) <= 1e-15:
        return u, norm
    return scaled(u, 1.0 / norm), norm


def _lsi_sides(v, p, space, spec, log_const):
    N = space.N
    ent = entropy(v, p, space, spec)
    ch = cheeger_energy(v, p, space, spec)
    if not ch > 0:
        raise ValueError("Cheeger energy vanishes; the inequality is void")
    return ent, (N / p) * (log_const + math.log(ch)), ch


def onedim_lsi_verify(
    v: RadialFunction,
    p: float,
    N: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    tolerance: Optional[float] = None,
) -> VerificationReport:
    """Ent(v^p) <= (N/p) log(L_{p,N} int |v'|^p) on the model cone, after L^p normalization."""
    cone = model_cone(N)
    w, norm = normalized(v, p, cone, spec)
    lhs, rhs, ch = _lsi_sides(w, p, cone, spec, log_lsc_constant(p, N))
    return VerificationReport.build(
        "lsi-1d",
        lhs,
        rhs,
        tolerance=tolerance,
        params={"space": cone.label(), "p": p, "N": N, "avr": 1.0, "input_norm": norm, "cheeger": ch},
        provenance=f"{cone.label()} family={family_of(v)} panels={spec.panels} order={spec.order}",
    )


def lsi_verify(
    u: RadialFunction,
    p: float,
    space: SpaceDescriptor,
    spec: QuadratureSpec = DEFAULT_SPEC,
    tolerance: Optional[float] = None,
    rearranged: bool = True,
) -> VerificationReport:
    """Ent(u^p) <= (N/p) log(L_{p,N} avr^{-p/N} Ch_p(u)) over a cone.

    The direct computation gives the reported sides. The rearrangement route
    (u-hat on the model cone, then the one-dimensional inequality, then
    Polya-Szego) is recorded in ``params``; for radial non-increasing ``u`` its
    right side coincides with the direct one.
    """
    N, avr = space.N, space.avr_param
    w, norm = normalized(u, p, space, spec)
    log_const = log_lsc_constant(p, N) - (p / N) * math.log(avr)
    lhs, rhs, ch = _lsi_sides(w, p, space, spec, log_const)
    params = {"space": space.label(), "p": p, "N": N, "avr": avr, "input_norm": norm, "cheeger": ch}
    if rearranged:
        cone = model_cone(N)
        w_hat = rearrangement(w, space)
        lhs_1d, rhs_1d, ch_hat = _lsi_sides(w_hat, p, cone, spec, log_lsc_constant(p, N))
        params.update(
            route_lhs=lhs_1d,
            route_rhs=rhs_1d,
            route_gap=max(abs(lhs_1d - lhs), abs(rhs_1d - rhs)) if _is_monotone(w) else None,
            polya_szego_slack=ch - avr ** (p / N) * ch_hat,
        )
    return VerificationReport.build(
        "lsi",
        lhs,
        rhs,
        tolerance=tolerance,
        params=params,
        provenance=f"{space.label()} family={family_of(u)} panels={spec.panels} order={spec.order}",
    )


def _is_monotone(u: RadialFunction) -> bool:
    return bool(getattr(u, "nonincreasing", False) or np.all(np.diff(u.values) <= 0))


def _theta_callback(space: SpaceDescriptor, theta_plus: Optional[Callable]):
    if theta_plus is None:
        avr = space.avr_param
        return (lambda r: np.full_like(np.asarray(r, dtype=float), avr)), avr
    avr = float(getattr(theta_plus, "avr", space.avr_param))
    return theta_plus, avr


def implied_lsi_constant(p: float, N: float, weight: Callable, spec: Optional[QuadratureSpec] = None) -> float:
    """Least C with the weighted inequality holding for v = exp(-s^{p'}/p).

    ``weight(s)`` multiplies the model-cone measure (for the scaling sweep it
    is theta^+ evaluated at s / lambda).
    """
    pc = conjugate(p)
    cone = model_cone(N)
    R = 80.0 ** (1.0 / pc)
    spec = spec or QuadratureSpec(truncation_radius=R, panels=96)

    def vp(s):
        return np.exp(-np.asarray(s, dtype=float) ** pc)

    A = integrate_weighted(lambda s: weight(s) * vp(s), cone, spec)
    E = integrate_weighted(lambda s: weight(s) * xlogx(vp(s)), cone, spec)
    # |v'|^p = (p'/p)^p s^{p'} v^p
    D = (pc / p) ** p * integrate_weighted(lambda s: weight(s) * np.asarray(s, dtype=float) ** pc * vp(s), cone, spec)
    return (A / D) * math.exp((p / N) * (E / A - math.log(A)))


def lsi_sharpness_sweep(
    p: float,
    N: float,
    space: SpaceDescriptor,
    lambdas,
    theta_plus: Optional[Callable] = None,
) -> SweepResult:
    """Implied constants C(lambda) from the rescaled test functions, and their lambda -> 0 limit."""
    lam = check_decreasing(lambdas, "lambdas")
    theta, avr = _theta_callback(space, theta_plus)
    implied = np.array(
        [implied_lsi_constant(p, N, lambda s, l=l: theta(np.asarray(s, dtype=float) / l)) for l in lam]
    )
    target = lsc_constant(p, N) * avr ** (-p / N)
    limit = richardson_limit(lam, implied)
    return SweepResult(
        lam,
        implied,
        limit,
        target,
        label="lsi-sharpness",
        extras={"p": p, "N": N, "avr": avr, "space": space.label(), "synthetic": bool(getattr(theta_plus, "synthetic", False))},
    )


def lsi_gaussian_identity(p: float, N: float, avr: float, C: float):
    """Both sides of the sweep inequality at the Gaussian test function, in closed form.

    Returns ``(lhs, rhs)`` with lhs = -N/p' - log(avr sigma_N Gamma(N/p'+1)) and
    rhs = (N/p) log(C (p'/p)^p N/p'); they coincide at C = L_{p,N} avr^{-p/N}.
    """
    pc = conjugate(p)
    lhs = -N / pc - (math.log(avr) + log_sigma(N) + lgamma(N / pc + 1.0))
    rhs = (N / p) * (math.log(C) + p * math.log(pc / p) + math.log(N / pc))
    return lhs, rhs


def _annulus_surface(space: SpaceDescriptor, r):
    # annulus [r/2, b] with the measure of B(r)
    N = space.N
    a = 0.5 * r
    b = (r**N + a**N) ** (1.0 / N)
    return space.avr_param * N * space.sigma_N * (a ** (N - 1.0) + b ** (N - 1.0))


def isoperimetry_verify(
    space: SpaceDescriptor,
    radii,
    annulus: bool = False,
    tolerance: Optional[float] = None,
) -> VerificationReport:
    """m+(B(r)) >= N sigma_N^{1/N} avr^{1/N} m(B(r))^{(N-1)/N}; the tightest radius is reported.

    With ``annulus`` the left side is the boundary measure of an annulus
    carrying the same volume as B(r); its slack is strictly positive.
    """
    r = np.atleast_1d(np.asarray(radii, dtype=float))
    if np.any(~(r > 0)):
        raise ValueError("radii must be > 0")
    N, avr = space.N, space.avr_param
    vol = ball_volume(space, r)
    surface = _annulus_surface(space, r) if annulus else minkowski_surface(space, r)
    bound = N * space.sigma_N ** (1.0 / N) * avr ** (1.0 / N) * vol ** ((N - 1.0) / N)
    rel = (surface - bound) / bound
    k = int(np.argmin(rel))
    return VerificationReport.build(
        "isoperimetry-annulus" if annulus else "isoperimetry",
        float(surface[k]),
        float(bound[k]),
        relation=">=",
        tolerance=tolerance,
        params={
            "space": space.label(),
            "N": N,
            "avr": avr,
            "radius": float(r[k]),
            "min_relative_slack": float(rel[k]),
            "max_relative_gap": float(np.max(np.abs(rel))),
        },
        provenance=f"{space.label()} radii={r.size}",
    )
