"""Small helpers shared by the verifiers."""
from __future__ import annotations

import numpy as np

from ..calculus import RadialFunction


def scaled(u: RadialFunction, c: float) -> RadialFunction:
    """c * u, keeping the exact evaluator, derivative and breakpoints."""
    c = float(c)
    ev = None if u.evaluator is None else (lambda r, f=u.evaluator: c * np.asarray(f(r), dtype=float))
    der = None if u.analytic_derivative is None else (lambda r, f=u.analytic_derivative: c * np.asarray(f(r), dtype=float))
    out = RadialFunction(
        u.grid,
        c * u.values,
        analytic_derivative=der,
        tail_bound=None if u.tail_bound is None else abs(c) * u.tail_bound,
        evaluator=ev,
        breakpoints=u.breakpoints,
    )
    if getattr(u, "nonincreasing", False) and c > 0:
        out.nonincreasing = True
    return out


def check_decreasing(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"{name} must be a non-empty 1-D array")
    if arr.size > 1 and np.any(np.diff(arr) >= 0):
        raise ValueError(f"{name} must be strictly decreasing")
    if np.any(~(arr > 0)):
        raise ValueError(f"{name} must be positive")
    return arr


def family_of(u) -> str:
    return getattr(u, "family", "custom")
