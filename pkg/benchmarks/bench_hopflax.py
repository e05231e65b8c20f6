"""Timing of the Hopf-Lax kernels: compiled extension against the numpy fallback.

Usage: python benchmarks/bench_hopflax.py [--sizes 512,1024,2048,4096] [--repeat 3]
"""
import argparse
import time

import numpy as np

from logsob import _hopflax_py
from logsob._kernels import BACKENDS
from logsob.hopf_lax import cost_denominator


def best_time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def instance(n, rng):
    x = np.linspace(0.0, 4.0, n)
    u = np.cumsum(rng.normal(scale=0.1, size=n)) + 0.5 * np.sin(3.0 * x)
    return x, np.ascontiguousarray(u)


def run(sizes, repeat, seed=0):
    rng = np.random.default_rng(seed)
    rows = []
    for n in sizes:
        x, u = instance(n, rng)
        for pc in (2.0, 1.5, 3.0):
            denom = cost_denominator(pc, 0.5)
            ref = _hopflax_py.brute(x, u, x, pc, denom)[0]
            for name, mod in sorted(BACKENDS.items()):
                if pc == 2.0:
                    fast = lambda mod=mod: mod.envelope_p2(x, u, x, denom)
                else:
                    fast = lambda mod=mod: mod.monotone_dc(x, u, x, pc, denom)
                brute = lambda mod=mod: mod.brute(x, u, x, pc, denom)
                gap = float(np.max(np.abs(fast()[0] - ref)))
                tf, tb = best_time(fast, repeat), best_time(brute, repeat)
                rows.append((n, pc, name, tf, tb, gap))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="512,1024,2048,4096")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    print(f"{'n':>6} {'p_conj':>6} {'backend':>8} {'fast [s]':>11} {'brute [s]':>11} {'speedup':>8} {'max gap':>10}")
    for n, pc, name, tf, tb, gap in run(sizes, args.repeat):
        print(f"{n:>6} {pc:>6g} {name:>8} {tf:>11.3e} {tb:>11.3e} {tb / tf:>8.1f} {gap:>10.2e}")
    if "cython" not in BACKENDS:
        print("compiled extension not available; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
