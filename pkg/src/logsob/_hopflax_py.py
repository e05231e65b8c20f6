"""Pure-Python/numpy versions of the compiled Hopf-Lax kernels.

Same signatures and the same floating-point expressions as the Cython
module, so both backends agree to rounding.
"""
import numpy as np

_BLOCK = 1 << 20  # max cost-matrix entries materialized at once


def _cost(d, pc, denom):
    if pc == 2.0:
        return d * d / denom
    return np.abs(d) ** pc / denom


def brute(y, u, x, pc, denom):
    m = x.size
    out = np.empty(m)
    arg = np.empty(m, dtype=np.int64)
    step = max(1, _BLOCK // max(y.size, 1))
    for s in range(0, m, step):
        xs = x[s : s + step]
        vals = u[None, :] + _cost(xs[:, None] - y[None, :], pc, denom)
        j = np.argmin(vals, axis=1)
        arg[s : s + step] = j
        out[s : s + step] = vals[np.arange(xs.size), j]
    return out, arg


def envelope_p2(y, u, x, denom):
    n = y.size
    yl, ul = y.tolist(), u.tolist()
    v = [0]
    z = [-np.inf]
    for q in range(1, n):
        while True:
            k = v[-1]
            s = (denom * (ul[q] - ul[k]) + yl[q] * yl[q] - yl[k] * yl[k]) / (2.0 * (yl[q] - yl[k]))
            if s <= z[-1] and len(v) > 1:
                v.pop()
                z.pop()
            else:
                break
        if s <= z[-1]:
            v[0] = q
            continue
        v.append(q)
        z.append(s)
    v = np.asarray(v, dtype=np.int64)
    # z[k] is the left end of the piece owned by v[k]
    k = np.searchsorted(np.asarray(z[1:]), x, side="left")
    arg = v[k]
    d = x - y[arg]
    return u[arg] + d * d / denom, arg


def monotone_dc(y, u, x, pc, denom):
    m = x.size
    out = np.empty(m)
    arg = np.empty(m, dtype=np.int64)
    stack = [(0, m - 1, 0, y.size - 1)] if m else []
    while stack:
        qlo, qhi, clo, chi = stack.pop()
        if qlo > qhi:
            continue
        mid = (qlo + qhi) // 2
        vals = u[clo : chi + 1] + _cost(x[mid] - y[clo : chi + 1], pc, denom)
        j = int(np.argmin(vals))
        out[mid] = vals[j]
        arg[mid] = clo + j
        stack.append((qlo, mid - 1, clo, clo + j))
        stack.append((mid + 1, qhi, clo + j, chi))
    return out, arg
