"""Weighted quadrature on the half-line and the functionals built on it."""
from __future__ import annotations

import csv
import functools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import roots_jacobi

from .spaces import SpaceDescriptor

FD_MIN_POINTS = 256


class TailNotNegligibleError(ArithmeticError):
    """The integrand carries too much mass beyond the truncation radius."""


class FiniteDifferenceWarning(UserWarning):
    pass


class RadialFunction:
    """A function of the radius, sampled on a strictly increasing grid.

    When ``evaluator`` is given, calls at arbitrary radii are exact; the
    sampled values are then just a cache of ``evaluator(grid)``. Without an
    evaluator the samples are interpolated monotonically (PCHIP) and the
    function is taken to vanish beyond the last grid point, with
    ``tail_bound`` bounding ``|u|`` out there.
    """

    def __init__(
        self,
        grid,
        values,
        analytic_derivative: Optional[Callable] = None,
        tail_bound: Optional[float] = None,
        evaluator: Optional[Callable] = None,
        breakpoints: Sequence[float] = (),
    ):
        grid = np.array(grid, dtype=float)
        values = np.array(values, dtype=float)
        if grid.ndim != 1 or values.shape != grid.shape:
            raise ValueError("grid and values must be 1-D arrays of equal length")
        if grid.size < 2:
            raise ValueError("need at least two grid points")
        if grid[0] < 0 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing and >= 0")
        if np.any(np.isnan(values)):
            raise ValueError("values contain NaN")
        grid.flags.writeable = False
        values.flags.writeable = False
        self.grid = grid
        self.values = values
        self.analytic_derivative = analytic_derivative
        self.tail_bound = None if tail_bound is None else float(tail_bound)
        self.evaluator = evaluator
        self.breakpoints = tuple(sorted(float(b) for b in breakpoints))
        self._interp = None
        self._fd = None

    @classmethod
    def from_callable(cls, f, grid, derivative=None, tail_bound=None, breakpoints=()):
        grid = np.asarray(grid, dtype=float)
        return cls(grid, f(grid), derivative, tail_bound, evaluator=f, breakpoints=breakpoints)

    def __len__(self):
        return self.grid.size

    @property
    def r_max(self) -> float:
        return float(self.grid[-1])

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.evaluator is not None:
            return np.asarray(self.evaluator(r), dtype=float)
        if self._interp is None:
            self._interp = PchipInterpolator(self.grid, self.values, extrapolate=False)
        out = self._interp(np.clip(r, self.grid[0], None))
        return np.where(r > self.grid[-1], 0.0, out)

    def fd_derivative_samples(self) -> np.ndarray:
        if self._fd is None:
            if self.grid.size < FD_MIN_POINTS:
                warnings.warn(
                    f"finite-difference derivative on only {self.grid.size} points",
                    FiniteDifferenceWarning,
                    stacklevel=3,
                )
            self._fd = np.gradient(self.values, self.grid, edge_order=2)
        return self._fd

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        if self.analytic_derivative is not None:
            return np.asarray(self.analytic_derivative(r), dtype=float)
        d = self.fd_derivative_samples()
        out = np.interp(r, self.grid, d)
        return np.where(r > self.grid[-1], 0.0, out)

    def derivative_mismatch(self) -> float:
        """Max relative gap between the analytic derivative and centered differences."""
        if self.analytic_derivative is None:
            return 0.0
        g, v = self.grid, self.values
        fd = (v[2:] - v[:-2]) / (g[2:] - g[:-2])
        an = self.analytic_derivative(g[1:-1])
        scale = np.maximum(np.abs(an), np.max(np.abs(an)) * 1e-3 + 1e-300)
        return float(np.max(np.abs(fd - an) / scale))

    def with_values(self, values, evaluator=None, analytic_derivative=None):
        return RadialFunction(
            self.grid, values, analytic_derivative, None, evaluator, self.breakpoints
        )

    def to_csv(self, path, header: bool = True) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            if header:
                w.writerow(["radius", "value"])
            for r, v in zip(self.grid, self.values):
                w.writerow([repr(float(r)), repr(float(v))])

    @classmethod
    def from_csv(cls, path, tail_bound=None) -> "RadialFunction":
        rows = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except ValueError:
                    if rows:
                        raise
                    continue  # header line
        if not rows:
            raise ValueError(f"no data rows in {path}")
        arr = np.array(rows)
        return cls(arr[:, 0], arr[:, 1], tail_bound=tail_bound)


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss-Legendre rule on ``[0, truncation_radius]``.

    The first panel is refined geometrically towards the origin so that
    integrands with fractional powers of ``r`` keep spectral-like accuracy.
    ``truncation_radius=None`` means: use the last grid point of the
    integrand (or 40 for bare callables).
    """

    truncation_radius: Optional[float] = None
    panels: int = 64
    order: int = 16
    tail_tolerance: float = 1e-10
    breakpoints: tuple = field(default_factory=tuple)
    grading_levels: int = 18
    breakpoint_levels: int = 10

    def __post_init__(self):
        if self.truncation_radius is not None and not self.truncation_radius > 0:
            raise ValueError("truncation_radius must be > 0")
        if int(self.panels) != self.panels or self.panels < 8:
            raise ValueError("panels must be an integer >= 8")
        if self.order not in (8, 16, 32):
            raise ValueError("order must be one of 8, 16, 32")
        if self.breakpoint_levels < 0:
            raise ValueError("breakpoint_levels must be >= 0")
        if not self.tail_tolerance > 0:
            raise ValueError("tail_tolerance must be > 0")
        object.__setattr__(self, "breakpoints", tuple(sorted(float(b) for b in self.breakpoints)))

    def refined(self, factor: int = 2) -> "QuadratureSpec":
        return QuadratureSpec(
            self.truncation_radius,
            self.panels * factor,
            self.order,
            self.tail_tolerance,
            self.breakpoints,
            self.grading_levels,
            self.breakpoint_levels,
        )


DEFAULT_SPEC = QuadratureSpec()
_GRADING_RATIO = 0.15


@functools.lru_cache(maxsize=None)
def _legendre(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


@functools.lru_cache(maxsize=None)
def _jacobi_unit(order: int, b: float):
    # rule for int_0^1 g(s) s^b ds
    x, w = roots_jacobi(order, 0.0, b)
    return 0.5 * (x + 1.0), w / 2.0 ** (b + 1.0)


def _graded_edges(edges: np.ndarray, singular, levels: int) -> np.ndarray:
    """Refine the panels next to each singular edge geometrically towards it."""
    if levels == 0 or not len(singular):
        return edges
    pos = np.searchsorted(edges, singular)
    frac = _GRADING_RATIO ** np.arange(1, levels + 1)
    extra = []
    for k, s in zip(pos, singular):
        if k > 1:  # the panel left of s (the first panel is graded separately)
            extra.append(s - (s - edges[k - 1]) * frac)
        if k < edges.size - 1:
            extra.append(s + (edges[k + 1] - s) * frac)
    if not extra:
        return edges
    return np.unique(np.concatenate([edges] + extra))


@functools.lru_cache(maxsize=256)
def radial_nodes(N: float, R: float, panels: int, order: int, breakpoints: tuple, levels: int, bp_levels: int = 0):
    """Nodes and weights for ``int_0^R g(r) r^(N-1) dr``.

    Panels are uniform, split at ``breakpoints`` and graded geometrically
    towards the origin (``levels``) and towards each breakpoint, including
    ``R`` itself when listed (``bp_levels``).
    """
    edges = np.linspace(0.0, R, panels + 1)
    extra = [b for b in breakpoints if 0.0 < b < R]
    if extra:
        edges = np.unique(np.concatenate([edges, extra]))
    singular = [b for b in breakpoints if 0.0 < b <= R]
    singular = [edges[np.argmin(np.abs(edges - b))] for b in singular]
    edges = _graded_edges(edges, singular, bp_levels)
    x, w = _legendre(order)
    h0 = edges[1]
    # geometric grading of [0, h0]
    cuts = h0 * _GRADING_RATIO ** np.arange(levels + 1)
    inner = cuts[-1]
    lo = np.concatenate([cuts[1:][::-1], edges[1:-1]])
    hi = np.concatenate([cuts[:-1][::-1], edges[2:]])
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    r = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wr = (half[:, None] * w[None, :]).ravel() * r ** (N - 1.0)
    s, ws = _jacobi_unit(order, N - 1.0)
    r = np.concatenate([inner * s, r])
    wr = np.concatenate([ws * inner ** N, wr])
    r.flags.writeable = False
    wr.flags.writeable = False
    return r, wr


def _resolve_radius(f, spec: QuadratureSpec) -> float:
    if spec.truncation_radius is not None:
        return float(spec.truncation_radius)
    if isinstance(f, RadialFunction):
        return f.r_max
    return 40.0


def _breaks(f, spec: QuadratureSpec) -> tuple:
    b = set(spec.breakpoints)
    if isinstance(f, RadialFunction):
        b.update(f.breakpoints)
    return tuple(sorted(b))


def _integrate(g, g_tail_bound, space: SpaceDescriptor, spec: QuadratureSpec, R: float, breaks):
    r, w = radial_nodes(space.N, R, int(spec.panels), spec.order, breaks, spec.grading_levels, spec.breakpoint_levels)
    vals = np.asarray(g(r), dtype=float)
    if np.any(np.isnan(vals)):
        raise ValueError("integrand evaluated to NaN")
    scale = space.avr_param * space.N * space.sigma_N
    total = scale * float(np.sum(vals * w))
    # tail over [R, 2R]
    if g_tail_bound is not None:
        tail = g_tail_bound * space.avr_param * space.sigma_N * (2.0 ** space.N - 1.0) * R ** space.N
    else:
        xt, wt = _legendre(spec.order)
        edges = np.linspace(R, 2.0 * R, 9)
        mid, half = 0.5 * (edges[:-1] + edges[1:]), 0.5 * np.diff(edges)
        rt = (mid[:, None] + half[:, None] * xt[None, :]).ravel()
        wt = (half[:, None] * wt[None, :]).ravel()
        tv = np.abs(np.asarray(g(rt), dtype=float))
        tail = scale * float(np.sum(np.nan_to_num(tv, nan=np.inf) * wt * rt ** (space.N - 1.0)))
    if not tail <= spec.tail_tolerance * max(abs(total), 1.0):
        raise TailNotNegligibleError(
            f"tail mass {tail:.3e} beyond R={R:g} exceeds tolerance {spec.tail_tolerance:.1e}"
        )
    return total


def _tail_of(f, power: float = 1.0):
    if isinstance(f, RadialFunction) and f.evaluator is None:
        return 0.0 if f.tail_bound is None else f.tail_bound ** power
    return None


def integrate_weighted(f, space: SpaceDescriptor, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Integral of ``f`` against ``avr N sigma_N r^(N-1) dr`` on the half-line."""
    return _integrate(f, _tail_of(f), space, spec, _resolve_radius(f, spec), _breaks(f, spec))


def _abs_pow(u, p: float):
    def g(r):
        return np.abs(u(r)) ** p

    return g


def lp_norm(u, p: float, space: SpaceDescriptor, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    if not p >= 1:
        raise ValueError("p must be >= 1")
    mass = _integrate(_abs_pow(u, p), _tail_of(u, p), space, spec, _resolve_radius(u, spec), _breaks(u, spec))
    return mass ** (1.0 / p)


def xlogx(a):
    """a log a with the continuous extension 0 log 0 = 0."""
    a = np.asarray(a, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(a > 0, a * np.log(np.where(a > 0, a, 1.0)), 0.0)


def entropy(u, p: float, space: SpaceDescriptor, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """int |u|^p log |u|^p dm."""
    if not p > 1:
        raise ValueError("p must be > 1")

    def g(r):
        return xlogx(np.abs(u(r)) ** p)

    tb = _tail_of(u, p)
    if tb:
        # |a log a| <= max(a|log a|) on [0, b], for b <= 1/e this is b|log b|
        tb = float(abs(xlogx(tb))) if tb <= math.exp(-1) else None
    return _integrate(g, tb, space, spec, _resolve_radius(u, spec), _breaks(u, spec))


def cheeger_energy(u: RadialFunction, p: float, space: SpaceDescriptor, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """int |u'|^p dm for a radial function (eikonal: |grad d| = 1)."""
    if not p > 1:
        raise ValueError("p must be > 1")
    if u.analytic_derivative is None:
        u.fd_derivative_samples()  # triggers the sparse-grid warning once

    def g(r):
        return np.abs(u.derivative(r)) ** p

    tb = 0.0 if u.analytic_derivative is None else None
    return _integrate(g, tb, space, spec, _resolve_radius(u, spec), _breaks(u, spec))


def slope(u: RadialFunction, i: int) -> float:
    """Discrete metric slope at grid index ``i``: the larger one-sided quotient."""
    g, v = u.grid, u.values
    n = g.size
    if not -n <= i < n:
        raise IndexError(i)
    i %= n
    q = []
    if i > 0:
        q.append(abs(v[i] - v[i - 1]) / (g[i] - g[i - 1]))
    if i < n - 1:
        q.append(abs(v[i + 1] - v[i]) / (g[i + 1] - g[i]))
    return max(q)


def slopes(grid, values) -> np.ndarray:
    """Vectorized :func:`slope` over a whole grid."""
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    q = np.abs(np.diff(values)) / np.diff(grid)
    out = np.empty_like(values)
    out[0] = q[0]
    out[-1] = q[-1]
    out[1:-1] = np.maximum(q[:-1], q[1:])
    return out
