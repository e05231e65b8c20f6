"""Hopf-Lax inf-convolution on the radial half-line.

For radial data on a cone the infimum over the whole space is attained
along the ray through the point, so

    Q_t u(r) = inf_{s >= 0} u(s) + |r - s|^{p'} / (p' t^{p'-1}).

The grid-restricted infimum is computed by a brute-force O(nm) oracle, by
the lower envelope of parabolas (p' = 2, linear time), or by divide and
conquer over monotone argmins (general p'). An optional golden-section
pass, available when ``u`` has an exact evaluator, then removes the
grid-restriction error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .calculus import RadialFunction, QuadratureSpec, integrate_weighted, slopes
from .reports import VerificationReport
from .spaces import SpaceDescriptor

# cancellation error of a difference quotient, in units of |value| / step
_ROUNDOFF = 4.0 * np.finfo(float).eps
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class HopfLaxParams:
    p_conj: float
    t: float
    t0: float

    def __post_init__(self):
        if not self.p_conj > 1:
            raise ValueError("p_conj must be > 1")
        if not 0 < self.t < self.t0:
            raise ValueError(f"need 0 < t < t0, got t={self.t!r}, t0={self.t0!r}")

    @property
    def p(self) -> float:
        return self.p_conj / (self.p_conj - 1.0)

    def at(self, t: float) -> "HopfLaxParams":
        return HopfLaxParams(self.p_conj, t, self.t0)


def cost_denominator(p_conj: float, t: float) -> float:
    return p_conj * t ** (p_conj - 1.0)


@dataclass
class ClassCertificate:
    lipschitz_ok: bool
    nonneg_set_bounded: bool
    q_t0_finite: bool
    growth_M: float
    growth_C0: float
    growth_ok: bool
    c0_threshold: float = math.nan

    @property
    def c0_strict(self) -> bool:
        return self.growth_C0 > self.c0_threshold

    @property
    def valid(self) -> bool:
        return (
            self.lipschitz_ok
            and self.nonneg_set_bounded
            and self.q_t0_finite
            and self.growth_ok
            and self.c0_strict
        )

    def failures(self) -> list:
        out = []
        if not (self.lipschitz_ok and self.nonneg_set_bounded):
            out.append("A1")
        if not self.q_t0_finite:
            out.append("A2")
        if not (self.growth_ok and self.c0_strict):
            out.append("A3")
        return out


class ClassViolationError(ValueError):
    def __init__(self, certificate: ClassCertificate):
        self.certificate = certificate
        super().__init__(f"function outside the admissible class: failed {certificate.failures()}")


@dataclass
class HopfLaxResult:
    grid: np.ndarray
    values: np.ndarray
    argmin_index: np.ndarray
    argmin_location: np.ndarray
    method: str = ""
    truncated: bool = False
    candidates: Optional[np.ndarray] = field(default=None, repr=False)


def _extend(c: np.ndarray) -> np.ndarray:
    # append points at the last spacing until the range has doubled
    h = c[-1] - c[-2]
    k = max(8, int(math.ceil(max(c[-1] - c[0], h) / h)))
    k = min(k, 4 * c.size)
    return np.concatenate([c, c[-1] + h * np.arange(1, k + 1)])


def _kernel(c, uc, x, pc, denom, method):
    if method == "brute":
        return _kernels.brute(c, uc, x, pc, denom)
    if pc == 2.0:
        return _kernels.envelope_p2(c, uc, x, denom)
    return _kernels.monotone_dc(c, uc, x, pc, denom)


def _golden_refine(f, x, lo, hi, pc, denom, iters=48):
    """Vectorized golden-section minimization of f(s) + cost(x - s) on [lo, hi]."""

    def phi(s):
        d = x - s
        return f(s) + (d * d if pc == 2.0 else np.abs(d) ** pc) / denom

    a, b = lo.copy(), hi.copy()
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = phi(c), phi(d)
    for _ in range(iters):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - _GOLDEN * (b - a)
        new_d = a + _GOLDEN * (b - a)
        # reuse the surviving interior point
        c, d = np.where(left, new_c, d), np.where(left, c, new_d)
        fnew = phi(np.where(left, c, d))
        fc, fd = np.where(left, fnew, fd), np.where(left, fc, fnew)
    s = np.where(fc < fd, c, d)
    return s, np.minimum(fc, fd)


def hopf_lax_transform(
    u: RadialFunction,
    t: float,
    p_conj: float,
    queries=None,
    candidates=None,
    method: str = "fast",
    refine: Optional[bool] = None,
    extend: bool = True,
) -> HopfLaxResult:
    """Q_t u at ``queries`` (default: the grid of ``u``), minimizing over ``candidates``.

    ``t = 0`` returns ``u`` itself. With an exact evaluator the candidate set is
    grown outward while minimizers sit on its last point, and (by default)
    each grid minimizer is polished by golden-section search between its
    neighbours. The refined value never exceeds the grid value or ``u(x)``.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    x = u.grid if queries is None else np.asarray(queries, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    order = np.argsort(x, kind="stable")
    xs = np.ascontiguousarray(x[order])
    if t == 0:
        vals = np.asarray(u(xs), dtype=float)
        res = HopfLaxResult(xs, vals, np.arange(xs.size), xs.copy(), "identity")
        return _unsort(res, order, scalar)
    c = np.ascontiguousarray(u.grid if candidates is None else np.asarray(candidates, dtype=float))
    uc = np.ascontiguousarray(u(c) if candidates is not None else u.values, dtype=float)
    if refine is None:
        refine = u.evaluator is not None
    pc = float(p_conj)
    denom = cost_denominator(pc, t)
    vals, arg = _kernel(c, uc, xs, pc, denom, method)
    truncated = False
    for _ in range(12):
        if arg.size == 0 or arg.max() < c.size - 1:
            break
        if u.evaluator is None or not extend:
            truncated = True
            break
        c = np.ascontiguousarray(_extend(c))
        uc = np.ascontiguousarray(u(c), dtype=float)
        vals, arg = _kernel(c, uc, xs, pc, denom, method)
    else:
        truncated = True
    loc = c[arg]
    if refine:
        if u.evaluator is None:
            raise ValueError("refinement needs an exact evaluator")
        lo = c[np.maximum(arg - 1, 0)]
        hi = c[np.minimum(arg + 1, c.size - 1)]
        s, fs = _golden_refine(u.evaluator, xs, lo, hi, pc, denom)
        better = fs < vals
        vals = np.where(better, fs, vals)
        loc = np.where(better, s, loc)
        # Q_t u <= u: y = x is always admissible
        ux = np.asarray(u.evaluator(xs), dtype=float)
        self_better = ux < vals
        vals = np.where(self_better, ux, vals)
        loc = np.where(self_better, xs, loc)
    res = HopfLaxResult(xs, vals, arg, loc, method + ("+refine" if refine else ""), truncated, c)
    return _unsort(res, order, scalar)


def _unsort(res: HopfLaxResult, order, scalar) -> HopfLaxResult:
    if np.all(order == np.arange(order.size)) and not scalar:
        return res
    inv = np.empty_like(order)
    inv[order] = np.arange(order.size)
    return HopfLaxResult(
        res.grid[inv],
        res.values[inv],
        res.argmin_index[inv],
        res.argmin_location[inv],
        res.method,
        res.truncated,
        res.candidates,
    )


def hopf_lax_bruteforce(u: RadialFunction, params: HopfLaxParams, refine: bool = False, **kw) -> HopfLaxResult:
    """Exact minimum over the grid by exhaustive search; the oracle for the fast paths."""
    return hopf_lax_transform(u, params.t, params.p_conj, method="brute", refine=refine, **kw)


def hopf_lax_fast(u: RadialFunction, params: HopfLaxParams, refine: bool = False, **kw) -> HopfLaxResult:
    """Linear-time envelope for p' = 2; divide and conquer over monotone argmins otherwise."""
    return hopf_lax_transform(u, params.t, params.p_conj, method="fast", refine=refine, **kw)


def hopf_lax_function(u: RadialFunction, t: float, p_conj: float) -> RadialFunction:
    """Q_t u as a :class:`RadialFunction` that can be evaluated anywhere."""
    if u.evaluator is None:
        base = hopf_lax_transform(u, t, p_conj, method="fast", refine=False)
        return RadialFunction(u.grid, base.values, tail_bound=u.tail_bound, breakpoints=u.breakpoints)
    cache = {"c": u.grid}

    def q(r):
        r = np.asarray(r, dtype=float)
        res = hopf_lax_transform(u, t, p_conj, queries=r, candidates=cache["c"])
        if res.candidates is not None and res.candidates.size > cache["c"].size:
            cache["c"] = res.candidates
        return res.values

    return RadialFunction(u.grid, q(u.grid), evaluator=q, breakpoints=u.breakpoints)


def growth_scan(u: RadialFunction, p_conj: float, factor: float = 4.0, n: int = 2048) -> np.ndarray:
    """Grid plus an extension out to ``factor * r_max`` when an evaluator exists."""
    if u.evaluator is None:
        return u.grid
    ext = np.linspace(u.r_max, factor * u.r_max, n)[1:]
    return np.concatenate([u.grid, ext])


def validate_class(u: RadialFunction, params: HopfLaxParams, M: float, C0: float) -> ClassCertificate:
    """Check (A1)-(A3) on the grid (and beyond it, through the evaluator)."""
    pc = params.p_conj
    r = growth_scan(u, pc)
    vals = u(r) if u.evaluator is not None else u.values
    threshold = pc * params.t0 ** (pc - 1.0)
    with np.errstate(all="ignore"):
        sl = slopes(r, vals)
        lipschitz_ok = bool(np.all(np.isfinite(sl)) and np.all(np.isfinite(vals)))
        nonneg = np.nonzero(vals >= 0)[0]
        nonneg_bounded = bool(nonneg.size == 0 or nonneg[-1] < r.size - 1)
        if u.evaluator is None and u.tail_bound is not None and u.tail_bound > 0:
            nonneg_bounded = False
        q0 = np.min(vals + r ** pc / threshold)
        q_finite = bool(np.isfinite(q0))
        lower = M - r ** pc / C0
        growth_ok = bool(np.all(vals >= lower - 1e-12 * np.maximum(1.0, np.abs(lower))))
    return ClassCertificate(lipschitz_ok, nonneg_bounded, q_finite, float(M), float(C0), growth_ok, threshold)


def growth_constant(u: RadialFunction, params: HopfLaxParams, M: float, C0: float) -> float:
    """C1 with |Q_t u(r)| <= C1 (1 + r^{p'}) for every 0 < t < t0."""
    pc, p = params.p_conj, params.p
    gap = C0 ** (p - 1.0) - params.t0 * pc ** (p - 1.0)
    if not gap > 0:
        raise ValueError("C0 does not exceed p' t0^{p'-1}")
    b = gap ** (pc - 1.0)
    r = growth_scan(u, pc)
    vals = u(r) if u.evaluator is not None else u.values
    U = max(0.0, float(np.max(vals / (1.0 + r ** pc))))
    return max(U, abs(M), 1.0 / b)


def growth_bound_check(u: RadialFunction, params: HopfLaxParams, M: float, C0: float) -> VerificationReport:
    C1 = growth_constant(u, params, M, C0)
    q = hopf_lax_transform(u, params.t, params.p_conj)
    ratio = np.abs(q.values) / (1.0 + q.grid ** params.p_conj)
    worst = float(np.max(ratio))
    return VerificationReport.build(
        "hopf-lax-growth",
        worst,
        C1,
        params={"t": params.t, "t0": params.t0, "p_conj": params.p_conj, "M": M, "C0": C0},
        provenance=f"grid n={u.grid.size}",
    )


def metric_inequality_check(x, y, z, t, s, r_exp, atol: float = 1e-12) -> bool:
    """d(x,y)^r/t^{r-1} + d(y,z)^r/s^{r-1} >= d(x,z)^r/(t+s)^{r-1}, vectorized."""
    x, y, z, t, s, r_exp = (np.asarray(a, dtype=float) for a in (x, y, z, t, s, r_exp))
    lhs = np.abs(x - y) ** r_exp / t ** (r_exp - 1) + np.abs(y - z) ** r_exp / s ** (r_exp - 1)
    rhs = np.abs(x - z) ** r_exp / (t + s) ** (r_exp - 1)
    return bool(np.all(lhs - rhs >= -atol * np.maximum(1.0, np.abs(rhs))))


def _probe_slope(qfun, x, delta, lo_bound=0.0):
    qx = qfun(x)
    up = np.abs(qfun(x + delta) - qx) / delta
    left = x - delta >= lo_bound
    xl = np.where(left, x - delta, x)
    down = np.where(left, np.abs(qx - qfun(xl)) / delta, 0.0)
    return np.maximum(up, down), qx


def hj_check(
    u: RadialFunction,
    params: HopfLaxParams,
    dt: Optional[float] = None,
    mode: Optional[str] = None,
    points=None,
) -> VerificationReport:
    """Hamilton-Jacobi inequality d+/dt Q_t u <= -|D Q_t u|^p / p at grid points.

    The per-point tolerance estimates the forward-difference error from a
    second time difference, plus the spatial error of the slope. ``mode`` is
    ``"probe"`` (slopes from exact evaluations at x +- delta, needs an
    evaluator) or ``"grid"`` (one-sided grid quotients).
    """
    t = params.t
    dt = 1e-5 * t if dt is None else float(dt)
    if not t + 2 * dt < params.t0:
        raise ValueError("t + dt must stay below t0")
    if mode is None:
        mode = "probe" if u.evaluator is not None else "grid"
    pc, p = params.p_conj, params.p
    x = u.grid if points is None else np.asarray(points, dtype=float)
    span = float(x[-1] - x[0])
    if mode == "probe":
        delta = 1e-6 * span

        def Q(tt):
            return lambda r: hopf_lax_transform(u, tt, pc, queries=r).values

        sl, q0 = _probe_slope(Q(t), x, delta, lo_bound=float(u.grid[0]))
        q1 = Q(t + dt)(x)
        q2 = Q(t + 2 * dt)(x)
        # spatial error of the one-sided quotient: max |Q''| over the cell
        # times delta / 2; a clamped left probe gives a one-sided second
        # difference, half the curvature
        clamped = x - delta < u.grid[0]
        qt = Q(t)
        qp, qm, qpp = qt(x + delta), qt(np.maximum(x - delta, u.grid[0])), qt(x + 2 * delta)
        curv = np.abs(qp - 2 * q0 + qm) / delta**2 * np.where(clamped, 2.0, 1.0)
        curv = np.maximum(curv, np.abs(qpp - 2 * qp + q0) / delta**2)
        err = 0.5 * curv * delta
    elif mode == "grid":
        res = hopf_lax_transform(u, t, pc, queries=x)
        q0 = res.values
        q1 = hopf_lax_transform(u, t + dt, pc, queries=x).values
        q2 = hopf_lax_transform(u, t + 2 * dt, pc, queries=x).values
        sl = slopes(x, q0)
        h = np.max(np.diff(x))
        d2 = np.zeros_like(q0)
        d2[1:-1] = np.abs(np.diff(q0, 2)) / (np.diff(x)[1:] * np.diff(x)[:-1])
        if x.size > 2:
            # one-sided quotients at the ends carry the neighbouring curvature
            d2[0], d2[-1] = d2[1], d2[-2]
        # Q is an envelope of cost profiles c(x - y); within a piece its
        # curvature is c'' over the cell, and a jump dy of the minimizer
        # moves the slope by c'(d + dy) - c'(d)
        loc = res.argmin_location
        jump = np.zeros_like(q0)
        jump[:-1] = np.abs(np.diff(loc))
        jump[1:] = np.maximum(jump[1:], np.abs(np.diff(loc)))
        d = np.abs(x - loc)
        scale = t ** (pc - 1.0)
        near = np.maximum(d - h, 0.0) if pc < 2.0 else d + h
        with np.errstate(divide="ignore"):
            K = (pc - 1.0) * near ** (pc - 2.0) / scale
        kink = ((d + jump) ** (pc - 1.0) - d ** (pc - 1.0)) / scale
        err = 0.5 * h * np.maximum(d2, K) + kink
    else:
        raise ValueError(f"unknown mode {mode!r}")
    dq = (q1 - q0) / dt
    rhs = -(sl**p) / p
    margin = rhs - dq
    # a slope error e moves |slope|^p/p by at most (s^p - (s-e)_+^p)/p
    tol = (
        0.5 * np.abs(q2 - 2 * q1 + q0) / dt
        + (sl**p - np.maximum(sl - err, 0.0) ** p) / p
        + 1e-9 * np.maximum(1.0, np.abs(dq))
        + _ROUNDOFF * np.maximum(np.abs(q0), np.abs(q1)) / dt
    )
    k = int(np.argmin(margin + tol))
    return VerificationReport(
        "hamilton-jacobi",
        float(dq[k]),
        float(rhs[k]),
        float(margin[k]),
        float(tol[k]),
        bool(np.all(margin >= -tol)),
        {
            "relation": "<=",
            "t": t,
            "dt": dt,
            "p_conj": pc,
            "mode": mode,
            "worst_margin": float(np.min(margin)),
            "max_abs_margin": float(np.max(np.abs(margin))),
            "max_tolerance": float(np.max(tol)),
            "points": int(x.size),
            "worst_radius": float(x[k]),
        },
        f"hopf-lax {mode} n={x.size}",
    )


def _quotient_error(d1, d2, d4):
    """Error of the quotient d1 from quotients at steps h, 2h, 4h.

    The order a, from (d4 - d2) / (d2 - d1) = 2^a, is capped at 1/2 and
    floored at 1/4: with u only C^{1,a} the quotient converges like h^a, and
    leading terms of mixed order make the observed a overshoot.
    """
    e1 = np.abs(d2 - d1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.abs(d4 - d2) / e1
    ratio = np.clip(np.where(np.isfinite(ratio), ratio, 2.0), 2.0**0.25, 2.0**0.5)
    return e1 / (ratio - 1.0)


def hj_initial_check(u: RadialFunction, p_conj: float, dt: float = 1e-6, points=None) -> VerificationReport:
    """Right derivative at t = 0: (Q_dt u - u)/dt >= -|Du|^p / p - tol."""
    p = p_conj / (p_conj - 1.0)
    x = u.grid if points is None else np.asarray(points, dtype=float)
    q = hopf_lax_transform(u, dt, p_conj, queries=x).values
    q2 = hopf_lax_transform(u, 2 * dt, p_conj, queries=x).values
    q4 = hopf_lax_transform(u, 4 * dt, p_conj, queries=x).values
    ux = u(x)
    if u.analytic_derivative is not None:
        sl = np.abs(u.derivative(x))
    else:
        sl = slopes(x, ux)
    dq = (q - ux) / dt
    rhs = -(sl**p) / p
    margin = dq - rhs
    tol = (
        _quotient_error(dq, (q2 - ux) / (2 * dt), (q4 - ux) / (4 * dt))
        + 1e-9 * np.maximum(1.0, np.abs(rhs))
        + _ROUNDOFF * np.maximum(np.abs(q), np.abs(ux)) / dt
    )
    if u.analytic_derivative is None:
        # grid slopes can undershoot |u'| by O(h)
        tol = tol + sl ** (p - 1.0) * np.max(np.diff(x))
    k = int(np.argmin(margin + tol))
    return VerificationReport(
        "hamilton-jacobi-initial",
        float(dq[k]),
        float(rhs[k]),
        float(margin[k]),
        float(tol[k]),
        bool(np.all(margin >= -tol)),
        {"relation": ">=", "dt": dt, "p_conj": p_conj, "worst_margin": float(np.min(margin)), "worst_radius": float(x[k])},
        f"hopf-lax n={x.size}",
    )


def semigroup_monotonicity_check(
    u: RadialFunction,
    params: HopfLaxParams,
    space: SpaceDescriptor,
    alpha: float = 1.0,
    times=None,
    spec: Optional[QuadratureSpec] = None,
) -> VerificationReport:
    """t -> int exp(alpha Q_t u) dm is non-increasing, and Q_t u decreases pointwise."""
    if times is None:
        times = params.t0 * np.linspace(0.0, 0.9, 8)
    times = np.sort(np.asarray(times, dtype=float))
    spec = spec or QuadratureSpec()
    H, Qs = [], []
    for tt in times:
        qf = hopf_lax_function(u, tt, params.p_conj) if tt > 0 else u
        H.append(integrate_weighted(lambda r, qf=qf: np.exp(alpha * qf(r)), space, spec))
        Qs.append(qf(u.grid))
    H = np.asarray(H)
    Qs = np.asarray(Qs)
    rises = np.diff(H)
    tol = 1e-9 * np.max(np.abs(H))
    pointwise = float(np.max(np.diff(Qs, axis=0))) if len(times) > 1 else 0.0
    worst = float(np.max(rises)) if rises.size else 0.0
    return VerificationReport(
        "semigroup-monotonicity",
        worst,
        0.0,
        -max(worst, pointwise),
        tol,
        bool(worst <= tol and pointwise <= 1e-12 * max(1.0, float(np.max(np.abs(Qs))))),
        {"relation": "<=", "alpha": alpha, "times": times.tolist(), "H": H.tolist(), "pointwise_max_rise": pointwise},
        f"{space.label()} n={u.grid.size}",
    )
