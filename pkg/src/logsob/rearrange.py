"""Decreasing rearrangement onto the model cone and the Polya-Szego check.

Superlevel sets of a sampled radial function are unions of intervals whose
endpoints are crossings of ``u = t``. Crossing cells are located from the
samples (split into monotone runs, so each run is a sorted search) and then
polished by a bracketed root solve on the exact evaluator.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .calculus import QuadratureSpec, RadialFunction, cheeger_energy, DEFAULT_SPEC
from .reports import VerificationReport
from .spaces import SpaceDescriptor, model_cone

REARRANGED_POINTS = 1024


class InfiniteMeasureError(ValueError):
    pass


@dataclass(frozen=True)
class DistributionProfile:
    thresholds: np.ndarray
    superlevel_measures: np.ndarray


def bracketed_roots(f, a, b, fa, fb, xtol=1e-13, maxiter=200):
    """Vectorized Illinois iteration for f(x) = 0 on brackets [a, b].

    ``fa`` and ``fb`` must have opposite signs in the sense
    ``(fa > 0) != (fb > 0)``. Falls back to bisection whenever the secant
    point leaves the bracket or two steps fail to halve it.
    """
    a, b = np.array(a, dtype=float), np.array(b, dtype=float)
    fa, fb = np.array(fa, dtype=float), np.array(fb, dtype=float)
    side = np.zeros(a.shape, dtype=np.int8)
    active = np.ones(a.shape, dtype=bool)
    # bracket widths one and two steps back; bisect when two steps failed to halve it
    w1 = np.full(a.shape, np.inf)
    w2 = np.full(a.shape, np.inf)
    for _ in range(maxiter):
        width = b - a
        stalled = width > 0.5 * w2
        w2, w1 = w1, width
        active &= width > xtol * np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
        active &= (fa != 0) & (fb != 0)
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        A, B, FA, FB = a[idx], b[idx], fa[idx], fb[idx]
        with np.errstate(divide="ignore", invalid="ignore"):
            c = (A * FB - B * FA) / (FB - FA)
        bad = ~((c > A) & (c < B)) | stalled[idx]
        c = np.where(bad, 0.5 * (A + B), c)
        fc = np.asarray(f(c, idx), dtype=float)
        same_a = (fc > 0) == (FA > 0)
        s = side[idx]
        # Illinois: halve the stale endpoint's value when it is kept twice
        FB_new = np.where(same_a & (s == 1), 0.5 * FB, FB)
        FA_new = np.where(~same_a & (s == -1), 0.5 * FA, FA)
        a[idx] = np.where(same_a, c, A)
        fa[idx] = np.where(same_a, fc, FA_new)
        b[idx] = np.where(same_a, B, c)
        fb[idx] = np.where(same_a, FB_new, fc)
        side[idx] = np.where(same_a, 1, -1)
    root = np.where(fa == 0, a, np.where(fb == 0, b, 0.5 * (a + b)))
    return root


def newton_bracketed(fd, a, b, fa, fb, xtol=1e-14, ftol=0.0, maxiter=100):
    """Safeguarded Newton iteration on brackets, vectorized.

    ``fd(x, idx)`` returns ``(f, f')``, optionally followed by the rounding
    floor of ``f`` at ``x`` which then replaces ``ftol``. Newton steps are
    taken while they stay in the bracket and contract; otherwise an Illinois
    false-position step is used, or bisection when that fails to halve the
    bracket. Iteration stops once ``|f| <= ftol`` (scalar or per element).
    """
    a, b = np.array(a, dtype=float), np.array(b, dtype=float)
    fa, fb = np.array(fa, dtype=float), np.array(fb, dtype=float)
    pos_a = fa > 0
    side = np.zeros(a.shape, dtype=np.int8)
    width = b - a
    last = np.full(a.shape, np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = (a * fb - b * fa) / (fb - fa)
    x = np.where((x > a) & (x < b), x, 0.5 * (a + b))
    x = np.where(fa == 0, a, np.where(fb == 0, b, x))
    active = (fa != 0) & (fb != 0)
    for _ in range(maxiter):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        X = x[idx]
        res = fd(X, idx)
        f = np.asarray(res[0], dtype=float)
        d = np.asarray(res[1], dtype=float)
        ft = res[2] if len(res) > 2 else (ftol[idx] if np.ndim(ftol) else ftol)
        same_a = (f > 0) == pos_a[idx]
        A = np.where(same_a, X, a[idx])
        B = np.where(same_a, b[idx], X)
        FA, FB, sd = fa[idx], fb[idx], side[idx]
        # Illinois: halve the stale endpoint value when the same side moves twice
        FB = np.where(same_a & (sd == -1), 0.5 * FB, FB)
        FA = np.where(~same_a & (sd == 1), 0.5 * FA, FA)
        FA = np.where(same_a, f, FA)
        FB = np.where(same_a, FB, f)
        a[idx], b[idx], fa[idx], fb[idx] = A, B, FA, FB
        side[idx] = np.where(same_a, -1, 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / d
            xf = (A * FB - B * FA) / (FB - FA)
        tol = xtol * np.maximum(1.0, np.abs(X))
        xn = X - step
        ok = np.isfinite(xn) & (xn >= A) & (xn <= B)
        converged = ok & (np.abs(step) <= tol)
        # linear contraction (square-root or double roots) hands over to the fallback
        newton = ok & ((np.abs(step) <= 0.25 * last[idx]) | converged)
        stalled = (B - A) > 0.5 * width[idx]
        width[idx] = B - A
        xf = np.where(np.isfinite(xf) & (xf > A) & (xf < B) & ~stalled, xf, 0.5 * (A + B))
        xn = np.where(newton, xn, xf)
        last[idx] = np.where(newton, np.abs(step), np.abs(xn - X))
        done = (np.abs(f) <= ft) | converged | (B - A <= tol)
        x[idx] = np.where(np.abs(f) <= ft, X, xn)
        active[idx] = ~done
    return x


def _monotone_runs(v):
    d = np.sign(np.diff(v))
    # plateaus join the preceding run
    for i in range(1, d.size):
        if d[i] == 0:
            d[i] = d[i - 1]
    if d.size and d[0] == 0:
        nz = np.nonzero(d)[0]
        d[: (nz[0] if nz.size else d.size)] = d[nz[0]] if nz.size else -1
    cuts = np.nonzero(np.diff(d))[0] + 1
    starts = np.concatenate([[0], cuts])
    ends = np.concatenate([cuts, [d.size]])
    return [(int(s), int(e), int(d[s])) for s, e in zip(starts, ends)]


def _golden_max(f, a, b, iters=60):
    g = (np.sqrt(5.0) - 1.0) / 2.0
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(np.array([c]))[0], f(np.array([d]))[0]
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(np.array([c]))[0]
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(np.array([d]))[0]
    return (c, fc) if fc > fd else (d, fd)


SMALL_LEVEL = 1e-6
LOG_TINY = float(np.log(np.finfo(float).tiny))


class LevelSets:
    """Superlevel-set measures ``m({u > t})`` for a non-negative radial function."""

    def __init__(self, u: RadialFunction, space: SpaceDescriptor):
        g = np.asarray(u.grid, dtype=float)
        v = np.asarray(u.values, dtype=float)
        if np.any(v < 0):
            raise ValueError("rearrangement needs a non-negative function")
        self.u = u
        self.space = space
        self.exact = u.evaluator is not None
        f = u.evaluator if self.exact else u
        self.f = lambda r: np.asarray(f(r), dtype=float)
        df = u.analytic_derivative
        self.fprime = None if (df is None or not self.exact) else (lambda r: np.asarray(df(r), dtype=float))
        if getattr(u, "nonincreasing", False):
            # known monotone: sample noise must not split it into runs
            v = np.minimum.accumulate(v)
            self.runs = [(0, v.size - 1, -1)]
        else:
            if self.exact:
                g, v = self._insert_points(g, v, np.asarray(u.breakpoints, dtype=float))
                g, v = self._insert_extrema(g, v)
                g, v = self._insert_cell_extrema(g, v)
            self.runs = _monotone_runs(v)
        if self.exact and 0.0 < v[-1] <= self.ftol_for(v) and float(self.f(np.array([2.0 * g[-1]]))[0]) == 0.0:
            # compact support whose end sample is rounding noise
            v = v.copy()
            v[-1] = 0.0
        self.g, self.v = g, v
        self.r_end = float(g[-1])
        self.v_end = float(v[-1])
        self.vmax = float(np.max(v))
        self.ftol = self.ftol_for(v)

    def _insert_points(self, g, v, r):
        # kinks of u become grid points, so no cell holds one
        r = r[(r > g[0]) & (r < g[-1])]
        r = r[~np.isin(r, g)]
        if r.size == 0:
            return g, v
        g2 = np.concatenate([g, r])
        order = np.argsort(g2, kind="stable")
        return g2[order], np.concatenate([v, self.f(r)])[order]

    @staticmethod
    def ftol_for(v):
        return 2.0 * np.finfo(float).eps * float(np.max(v))

    def _insert_extrema(self, g, v):
        # polish interior sample maxima/minima so sup u is not under-sampled
        i = np.arange(1, g.size - 1)
        peak = (v[i] > v[i - 1]) & (v[i] >= v[i + 1])
        pit = (v[i] < v[i - 1]) & (v[i] <= v[i + 1])
        i = i[peak | pit]
        if i.size == 0:
            return g, v
        sgn = np.where(v[i] > v[i - 1], 1.0, -1.0)
        r = np.full(i.size, np.nan)
        val = np.full(i.size, np.nan)
        if self.fprime is not None:
            da, db = self.fprime(g[i - 1]), self.fprime(g[i + 1])
            # a sign change of u' (smooth extremum or kink) pins the point to rounding level
            sc = ((da > 0) != (db > 0)) & (da != 0) & (db != 0)
            if sc.any():
                fp = self.fprime
                r[sc] = bracketed_roots(lambda x, idx: fp(x), g[i - 1][sc], g[i + 1][sc], da[sc], db[sc], xtol=1e-15)
                val[sc] = self.f(r[sc])
        missing = ~(sgn * (val - v[i]) >= 0)
        for k in np.nonzero(missing)[0]:
            s_ = sgn[k]
            r[k], val[k] = _golden_max(lambda x: s_ * self.f(x), g[i[k] - 1], g[i[k] + 1])
            val[k] *= s_
        new = (sgn * (val - v[i]) > 0) & (r != g[i - 1]) & (r != g[i]) & (r != g[i + 1])
        extra_r, extra_v = r[new], val[new]
        if extra_r.size == 0:
            return g, v
        g2 = np.concatenate([g, extra_r])
        order = np.argsort(g2, kind="stable")
        g2 = g2[order]
        v2 = np.concatenate([v, extra_v])[order]
        keep = np.concatenate([[True], np.diff(g2) > 0])
        return g2[keep], v2[keep]

    def _insert_cell_extrema(self, g, v):
        # extrema strictly inside a cell whose end samples are monotone, e.g. a
        # small bump right after a kink; u' changes sign just inside the ends
        if self.fprime is None:
            return g, v
        a, b = g[:-1], g[1:]
        d = 1e-7 * (b - a)
        da, db = self.fprime(a + d), self.fprime(b - d)
        sc = ((da > 0) & (db < 0)) | ((da < 0) & (db > 0))
        if not sc.any():
            return g, v
        j = np.nonzero(sc)[0]
        fp = self.fprime
        r = bracketed_roots(lambda x, idx: fp(x), a[j] + d[j], b[j] - d[j], da[j], db[j], xtol=1e-15)
        ok = (r > a[j]) & (r < b[j])
        return self._insert_points(g, v, r[ok])

    def _vol(self, r):
        s = self.space
        return s.avr_param * s.sigma_N * np.asarray(r, dtype=float) ** s.N

    def crossing_cells(self, t):
        """Grid cells holding the crossings of ``u = t``: ``(level_index, cell, sign)``."""
        t = np.asarray(t, dtype=float)
        li, cell, sg = [], [], []
        levels = np.arange(t.size)
        for s, e, direction in self.runs:
            w = self.v[s : e + 1]
            if direction < 0:
                cnt = np.searchsorted(-w, -t, side="left")
                sign = 1
            else:
                cnt = np.searchsorted(w, t, side="right")
                sign = -1
            ok = (cnt >= 1) & (cnt <= w.size - 1)
            li.append(levels[ok])
            cell.append(s + cnt[ok] - 1)
            sg.append(np.full(int(ok.sum()), sign, dtype=np.int8))
        li = np.concatenate(li) if li else np.zeros(0, int)
        cell = np.concatenate(cell) if cell else np.zeros(0, int)
        sg = np.concatenate(sg) if sg else np.zeros(0, np.int8)
        return li, cell, sg

    def crossings(self, t):
        """Crossing radii of ``u = t`` for each level, as flat arrays.

        Returns ``(level_index, radius, sign)`` with sign ``+1`` where the
        superlevel set ends and ``-1`` where it starts.
        """
        t = np.asarray(t, dtype=float)
        li, cell, sg = self.crossing_cells(t)
        if li.size == 0:
            return li, np.zeros(0), sg
        tl = t[li]
        a, b = self.g[cell], self.g[cell + 1]
        fa, fb = self.v[cell] - tl, self.v[cell + 1] - tl
        if self.fprime is not None:
            roots = np.empty(tl.shape)
            # tiny levels sit in flat tails where f' underflows; log u is tame there
            small = (tl > 0) & (tl < SMALL_LEVEL * self.vmax)
            big = ~small
            if big.any():
                tb = tl[big]
                roots[big] = newton_bracketed(self._crossing_fd(tb), a[big], b[big], fa[big], fb[big])
            if small.any():
                roots[small] = self._log_crossings(tl[small], a[small], b[small])
        else:
            roots = bracketed_roots(lambda x, idx: self.f(x) - tl[idx], a, b, fa, fb)
        return li, roots, sg

    def _crossing_fd(self, t):
        eps = np.finfo(float).eps

        def fd(x, idx):
            d = self.fprime(x)
            # values are known to ftol, and x itself only to a rounding error
            return self.f(x) - t[idx], d, self.ftol + 4.0 * eps * np.abs(x * d)

        return fd

    def _log_crossings(self, t, a, b):
        lt = np.log(t)
        eps = np.finfo(float).eps

        def logf(x):
            with np.errstate(divide="ignore"):
                return np.log(np.maximum(self.f(x), 0.0))

        def fd(x, idx):
            fx = self.f(x)
            with np.errstate(divide="ignore", invalid="ignore"):
                d = self.fprime(x) / fx
                return np.log(np.maximum(fx, 0.0)) - lt[idx], d, 4.0 * eps * (1.0 + np.abs(x * d))

        return newton_bracketed(fd, a, b, logf(a) - lt, logf(b) - lt)

    def _tail_roots(self, t):
        """Where u drops to ``t`` beyond the grid end (evaluator only)."""
        lo = np.full(t.shape, self.r_end)
        hi = lo.copy()
        f_hi = np.full(t.shape, self.v_end) - t
        todo = f_hi > 0
        for _ in range(60):
            if not todo.any():
                break
            lo = np.where(todo, hi, lo)
            hi = np.where(todo, 2.0 * hi, hi)
            f_hi = np.where(todo, self.f(hi) - t, f_hi)
            todo = f_hi > 0
        if todo.any():
            raise InfiniteMeasureError("superlevel set does not fit in any finite ball")
        f_lo = self.f(lo) - t
        return bracketed_roots(lambda x, idx: self.f(x) - t[idx], lo, hi, f_lo, f_hi)

    def measure(self, t, with_derivative: bool = False, with_floor: bool = False):
        """m({u > t}); optionally its t-derivative and its rounding floor."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        mu = np.zeros(t.shape)
        dmu = np.zeros(t.shape)
        vsum = np.zeros(t.shape)
        with_derivative = with_derivative or with_floor
        li, roots, sg = self.crossings(t)
        if li.size:
            np.add.at(mu, li, sg * self._vol(roots))
            np.add.at(vsum, li, self._vol(roots))
            if with_derivative:
                du = np.abs(self.u.derivative(roots))
                with np.errstate(divide="ignore", over="ignore"):
                    contrib = self.space.weight(roots) / du
                np.add.at(dmu, li, -contrib)
        tail = t < self.v_end
        if tail.any():
            if not self.exact:
                if self.u.tail_bound:
                    raise InfiniteMeasureError("level below the certified tail bound")
                if np.any(t[tail] < 0):
                    raise InfiniteMeasureError("t < 0 has infinite superlevel measure")
                mu[tail] += self._vol(self.r_end)
            else:
                if np.any(t[tail] <= 0):
                    raise InfiniteMeasureError("t <= 0 with support reaching past the grid")
                rt = self._tail_roots(t[tail])
                mu[tail] += self._vol(rt)
                vsum[tail] += self._vol(rt)
                if with_derivative:
                    du = np.abs(self.u.derivative(rt))
                    with np.errstate(divide="ignore", over="ignore"):
                        dmu[tail] -= self.space.weight(rt) / du
        if with_floor:
            # summation rounding plus the crossing-level tolerance carried through mu'
            eps = np.finfo(float).eps
            return mu, dmu, 4.0 * eps * vsum + self.ftol * np.abs(dmu)
        if with_derivative:
            return mu, dmu
        return mu


def distribution(u: RadialFunction, space: SpaceDescriptor, levels) -> DistributionProfile:
    """m({u > t}) at each level, computed from the crossing radii."""
    ls = u if isinstance(u, LevelSets) else LevelSets(u, space)
    t = np.sort(np.asarray(levels, dtype=float))[::-1]
    if np.any(t < 0):
        raise ValueError("levels must be >= 0")
    return DistributionProfile(t, ls.measure(t))


class _Rearranged:
    """Exact evaluator of the generalized inverse y -> inf{t : mu(t) <= sigma_N y^N}."""

    def __init__(self, ls: LevelSets):
        self.ls = ls
        self.N = ls.space.N
        self.sigma = ls.space.sigma_N
        tab = np.unique(np.concatenate([ls.v, [ls.vmax]]))
        tab = tab[tab >= 0]
        if ls.exact and ls.v_end > 0:
            # the level 0 has unbounded superlevel set
            tab = tab[tab > 0]
        self.t_tab = tab
        self.mu_tab = ls.measure(tab)
        self._cache = {}
        self._band_tab = None
        # extremum levels, where mu has square-root kinks
        mx, mn = [ls.vmax], []
        prev = 0
        for s, _, direction in ls.runs:
            if direction != prev:
                (mx if direction < 0 else mn).append(ls.v[s])
            prev = direction
        self.max_levels = np.array(mx)
        self.min_levels = np.array(mn)

    def target(self, y):
        return self.sigma * np.asarray(y, dtype=float) ** self.N

    def levels(self, y):
        return self._solve(y)[0]

    def _solve(self, y):
        """Levels u-hat(y) and mu'(u-hat(y)) (NaN where not computed)."""
        y = np.asarray(y, dtype=float)
        key = y.tobytes()
        if key in self._cache:
            return self._cache[key]
        m = self.target(y)
        mu_tab, t_tab = self.mu_tab, self.t_tab
        # number of table levels whose superlevel measure exceeds m
        k = np.searchsorted(-mu_tab, -m, side="left")
        out = np.empty(y.shape)
        dmu = np.full(y.shape, np.nan)
        top = k >= t_tab.size
        out[top] = t_tab[-1]
        inside = (k >= 1) & ~top
        below = k == 0
        if inside.any():
            lo, hi = t_tab[k[inside] - 1], t_tab[k[inside]]
            mi = m[inside]
            flo = mu_tab[k[inside] - 1] - mi
            fhi = mu_tab[k[inside]] - mi
            # next to an extremum level the last few ulps of t span a visible range of
            # measures; targets inside that band are the extremum level itself
            band_hi, band_lo = self._bands(k[inside])
            pin_hi = mi <= band_hi
            pin_lo = (mi >= band_lo) & ~pin_hi
            t, d, ok = np.empty(mi.shape), np.full(mi.shape, np.nan), np.zeros(mi.shape, dtype=bool)
            t[pin_hi], t[pin_lo] = hi[pin_hi], lo[pin_lo]
            ok = pin_hi | pin_lo
            free = ~ok
            if self.ls.fprime is not None and free.any():
                t[free], d[free], ok[free] = self._joint(mi[free], lo[free], hi[free], flo[free], fhi[free])
            # targets within rounding of a table measure take that level
            snap = 4.0 * np.finfo(float).eps * mi
            at_lo, at_hi = ~ok & (flo <= snap), ~ok & (fhi >= -snap)
            t[at_lo], t[at_hi] = lo[at_lo], hi[at_hi]
            ok |= at_lo | at_hi
            bad = ~ok
            if bad.any():
                t[bad] = newton_bracketed(self._mu_fd(mi[bad]), lo[bad], hi[bad], flo[bad], fhi[bad], xtol=1e-15)
            out[inside] = t
            dmu[inside] = d
        if below.any():
            out[below], dmu[below] = self._below_table(m[below])
        if len(self._cache) > 32:
            self._cache.clear()
        self._cache[key] = (out, dmu)
        return out, dmu

    def _bands(self, k):
        """Measures a few ulps inside table intervals k that end at extremum levels.

        Returns ``(band_hi, band_lo)``: mu(hi - 4 ulp) where hi is a maximum
        level and mu(lo + 4 ulp) where lo is a minimum level, -inf / +inf
        otherwise (so the comparisons never fire).
        """
        if self._band_tab is None:
            t, eps = self.t_tab, 4.0 * np.finfo(float).eps
            bh = np.full(t.size, -np.inf)
            bl = np.full(t.size, np.inf)
            mx = np.isin(t, self.max_levels) & (t > 0)
            mx[0] = False
            mn = np.isin(t, self.min_levels) & (t > 0)
            mn[-1] = False
            if mx.any():
                bh[mx] = self.ls.measure(t[mx] * (1.0 - eps))
            if mn.any():
                # stored at the index of the interval's upper end
                j = np.nonzero(mn)[0]
                bl[j + 1] = self.ls.measure(t[j] * (1.0 + eps))
            self._band_tab = (bh, bl)
        bh, bl = self._band_tab
        return bh[k], bl[k]

    def _joint(self, m, lo, hi, flo, fhi, maxiter=16):
        """Solve mu(t) = m together with the crossings u(x_k) = t.

        Between consecutive table levels every crossing stays in one grid
        cell, so a single Newton system in the crossings replaces the nested
        solve. The level is slaved to a master crossing, t = u(x_M), taken
        next to the extremum when the interval ends at one; mu is smooth in
        x_M even where it has a square-root kink in t.
        Returns the levels, mu'(t) and a convergence mask.
        """
        ls = self.ls
        n = m.size
        # tiny levels sit in flat tails; there the equations are log u(x_k) = log t
        lg = hi <= SMALL_LEVEL * ls.vmax
        mode = np.where(lg, 0, np.where(np.isin(hi, self.max_levels), 1, np.where(np.isin(lo, self.min_levels), 2, 0)))
        # initial level by false position in sqrt(hi - t) or sqrt(t - lo) near extrema
        span = np.where(mode == 0, hi - lo, np.sqrt(hi - lo))
        base = np.where(mode == 0, lo, 0.0)
        f0, f1 = np.where(mode == 1, fhi, flo), np.where(mode == 1, flo, fhi)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = base + span * f0 / (f0 - f1)
        z = np.where(np.isfinite(z) & (z > base) & (z < base + span), z, base + 0.5 * span)
        li, cell, sg = ls.crossing_cells(0.5 * (lo + hi))
        if li.size == 0:
            return np.full(n, np.nan), np.full(n, np.nan), np.zeros(n, dtype=bool)
        md = mode[li]
        lgc = lg[li]
        a, b = ls.g[cell], ls.g[cell + 1]
        va, vb = ls.v[cell], ls.v[cell + 1]

        # the square-root coordinate only in cells that touch the extremum level
        edge = np.where(md == 1, (va == hi[li]) | (vb == hi[li]), np.where(md == 2, (va == lo[li]) | (vb == lo[li]), True))
        sq = edge & (md != 0)

        # log coordinate in tiny-level cells, unless the cell reaches u = 0
        lgx = lgc & (np.minimum(va, vb) > 0)

        def coord(v, use_sq):
            with np.errstate(divide="ignore"):
                c = np.where(lgx, np.log(np.maximum(v, 0.0)), v)
            return np.where(use_sq, np.sqrt(np.maximum(np.where(md == 1, hi[li] - v, v - lo[li]), 0.0)), c)

        with np.errstate(divide="ignore"):
            T_lo, T_hi = np.where(lg, np.log(lo), lo), np.where(lg, np.log(hi), hi)
            tz = np.where(mode == 0, z, np.where(mode == 1, hi - z * z, lo + z * z))
            T0 = np.where(lg, np.log(tz), tz)
        target = np.where(sq, z[li], np.where(lgc & ~lgx, tz[li], T0[li]))
        ca, cb = coord(va, sq), coord(vb, sq)
        with np.errstate(divide="ignore", invalid="ignore"):
            x = a + (target - ca) / (cb - ca) * (b - a)
        # stay off the cell ends by a few ulps, where u' may vanish
        inset = 8.0 * np.finfo(float).eps * np.maximum(np.abs(a), np.abs(b))
        x = np.where(np.isfinite(x), np.clip(x, a + inset, b - inset), 0.5 * (a + b))
        # master crossing per entry: one whose cell touches the extremum level
        order = np.lexsort((~edge, li))
        first = np.concatenate([[True], np.diff(li[order]) != 0])
        master = np.full(n, -1)
        master[li[order][first]] = order[first]
        sgf = sg.astype(float)
        eps = np.finfo(float).eps
        ok = np.zeros(n, dtype=bool)
        live = master >= 0
        t = np.full(n, np.nan)
        dmu = np.full(n, np.nan)
        fx = np.empty(li.size)
        d = np.empty(li.size)
        x_prev = x.copy()
        for _ in range(maxiter):
            on = live[li]
            if not on.any():
                break
            xs, lk = x[on], li[on]
            fv, dv = ls.f(xs), ls.fprime(xs)
            with np.errstate(divide="ignore", invalid="ignore"):
                fx[on] = np.where(lgc[on], np.log(np.maximum(fv, 0.0)), fv)
                d[on] = np.where(lgc[on], dv / fv, dv)
            fo, do = fx[on], d[on]
            # a step into an underflowed tail (log u = -inf) is halved back
            lost = ~(np.isfinite(fo) & np.isfinite(do))
            retry = np.bincount(lk, lost, n) > 0
            tc = np.where(live, fx[master], np.nan)
            w = ls.space.weight(xs)
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                # residuals at rounding level carry no information next to a flat peak
                noise = 4.0 * eps * np.maximum(1.0, np.abs(fo))
                r = np.where(np.abs(tc[lk] - fo) <= noise, 0.0, (tc[lk] - fo) / do)
                # sign(u') = -sign, so each term of mu' is -w/|u'|; at a smooth peak it is -inf
                S = np.bincount(lk, -w / np.abs(do), n)
                dt = (m - np.bincount(lk, sgf[on] * ls._vol(xs), n) - np.bincount(lk, sgf[on] * w * r, n)) / S
                dtk = dt[lk]
                dx = r + np.where(dtk == 0.0, 0.0, dtk / do)
                xn = xs + dx
            ao, bo = a[on], b[on]
            out = (xn < ao) | (xn > bo)
            if out.any():
                # a log step leaving the cell tries the plain step in u instead; it is exact
                # on linear pieces and does not overshoot on convex tails
                with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                    x_lin = xs + (np.exp(tc + dt)[lk] - fv) / dv
                use = out & lgc[on] & (x_lin > ao) & (x_lin < bo)
                xn = np.where(use, x_lin, xn)
            # a step leaving the cell goes halfway to its edge instead, never onto a vanishing u'
            xn = np.where(xn < ao, 0.5 * (xs + ao), np.where(xn > bo, 0.5 * (xs + bo), xn))
            # steps in units of the attainable accuracy: 1e-10 relative, or the rounding
            # floor ulp(u) / |u'| where u' is small; unclipped, so a crossing held back
            # at a cell edge never passes
            stepx = np.zeros(n)
            with np.errstate(invalid="ignore", divide="ignore"):
                tolx = np.maximum(1e-10 * np.maximum(1.0, np.abs(xs)), 2.0 * noise / np.abs(do))
                np.maximum.at(stepx, lk, np.abs(dx) / tolx)
                step = np.maximum(np.abs(dt) / (1e-10 * np.maximum(1.0, np.abs(tc))), stepx)
            # S < 0 always; anything else means a flat crossing, left to the nested solve
            good = live & ~retry & np.isfinite(step) & np.isfinite(S) & (S < 0)
            live &= good | retry
            t = np.where(good, np.clip(tc + dt, T_lo, T_hi), t)
            back = retry[lk]
            xp = x_prev[on]
            x_prev[on] = np.where(good[lk], xs, xp)
            x[on] = np.where(good[lk], xn, np.where(back, np.where(lost, 0.5 * (xp + xs), xs), xs))
            dmu = np.where(good, S, dmu)
            # quadratic convergence: after a step this small the error is at rounding level
            conv = good & (step <= 1.0)
            # levels below the smallest normal double are zero
            gone = live & lg & (tc < LOG_TINY)
            t = np.where(gone, -np.inf, t)
            dmu = np.where(gone, np.nan, dmu)
            conv |= gone
            ok |= conv
            live &= ~conv
        # back from log t: mu'(t) = (d mu / d log t) / t
        t = np.where(lg, np.exp(t), t)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            dmu = np.where(lg, dmu / t, dmu)
        return t, dmu, ok

    def _mu_fd(self, m):
        def fd(t, idx):
            mu, dmu, floor = self.ls.measure(t, with_floor=True)
            return mu - m[idx], dmu, floor

        return fd

    def _below_table(self, m):
        """Levels and mu' for targets beyond the last table measure.

        Such levels lie below every sample, so {u > t} is the ball out to the
        tail crossing rho and mu(t) = vol(rho): rho follows from m directly.
        """
        ls = self.ls
        if not ls.exact or self.t_tab[0] <= 0:
            # past the support the rearrangement vanishes
            return np.zeros(m.shape), np.full(m.shape, -np.inf)
        sp = ls.space
        rho = np.maximum((m / (sp.avr_param * sp.sigma_N)) ** (1.0 / sp.N), ls.r_end)
        t = np.minimum(ls.f(rho), self.t_tab[0])
        dmu = np.full(m.shape, np.nan)
        if ls.fprime is not None:
            du = np.abs(ls.fprime(rho))
            with np.errstate(divide="ignore", over="ignore"):
                dmu = np.where(du > 0, -sp.weight(rho) / du, -np.inf)
        return t, dmu

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        shape = y.shape
        return self.levels(np.atleast_1d(y).ravel()).reshape(shape)

    def derivative(self, y):
        """u-hat'(y) = N sigma_N y^(N-1) / mu'(u-hat(y))."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        t, dmu = self._solve(y)
        dmu = dmu.copy()
        pos = t > 0 if self.ls.exact else t >= 0
        need = pos & np.isnan(dmu)
        if need.any():
            dmu[need] = self.ls.measure(t[need], with_derivative=True)[1]
        dmu[~pos] = -np.inf
        with np.errstate(divide="ignore", invalid="ignore"):
            d = self.N * self.sigma * y ** (self.N - 1.0) / dmu
        d = np.where(np.isfinite(d), d, 0.0)
        # beyond the support, or on the top plateau, the slope is zero
        d = np.where((t <= 0) | (t >= self.t_tab[-1]), 0.0, d)
        return d


def rearrangement(u: RadialFunction, space: SpaceDescriptor, points: int = REARRANGED_POINTS) -> RadialFunction:
    """The non-increasing rearrangement u-hat, living on the model cone of dimension N.

    The result carries an exact evaluator (nested inversion of the
    distribution function) and its analytic derivative, on a fresh grid of
    ``points`` log-spaced radii over the image of the support.
    """
    ls = LevelSets(u, space)
    ev = _Rearranged(ls)
    sigma = space.sigma_N
    m_end = float(ev.mu_tab[0])
    y_end = (m_end / sigma) ** (1.0 / space.N)
    if not y_end > 0:
        grid = np.linspace(0.0, 1.0, points)
    else:
        grid = np.concatenate([[0.0], np.geomspace(y_end * 1e-6, y_end, points - 1)])
    compact = ev.t_tab[0] == 0
    breaks = [y_end] if (compact and y_end > 0) else []
    # levels where superlevel sets change topology put kinks into u-hat
    crit = [ls.v[s] for s, _, _ in ls.runs] + [ls.v[-1]]
    # so do the levels of kinks of u
    if u.breakpoints:
        crit.extend(np.atleast_1d(u(np.asarray(u.breakpoints, dtype=float))).tolist())
    crit = np.array(crit)
    crit = crit[(crit > 0) & (crit < ls.vmax)]
    if crit.size:
        yc = (ls.measure(np.unique(crit)) / sigma) ** (1.0 / space.N)
        breaks.extend(float(y) for y in yc if 0 < y)
    vals = ev(grid)
    out = RadialFunction(grid, vals, analytic_derivative=ev.derivative, evaluator=ev, breakpoints=breaks)
    out.level_sets = ls
    out.nonincreasing = True
    return out


def polya_szego_check(
    u: RadialFunction,
    p: float,
    space: SpaceDescriptor,
    spec: QuadratureSpec = DEFAULT_SPEC,
    u_hat: Optional[RadialFunction] = None,
    tolerance: Optional[float] = None,
) -> VerificationReport:
    """Ch_p(u) >= avr^{p/N} * int |u-hat'|^p d omega."""
    if u_hat is None:
        u_hat = rearrangement(u, space)
    cone = model_cone(space.N)
    lhs = cheeger_energy(u, p, space, spec)
    rhs = space.avr_param ** (p / space.N) * cheeger_energy(u_hat, p, cone, spec)
    return VerificationReport.build(
        "polya-szego",
        lhs,
        rhs,
        relation=">=",
        tolerance=tolerance,
        params={"space": space.label(), "p": p, "N": space.N, "avr": space.avr_param},
        provenance=f"{space.label()} n={u.grid.size} panels={spec.panels}",
    )
