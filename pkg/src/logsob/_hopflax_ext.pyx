# Compiled Hopf-Lax kernels. Candidates y and queries x must be sorted
# ascending; the cost is |x - y|^pc / denom with denom = pc * t^(pc - 1).
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow, INFINITY

cnp.import_array()


cdef inline double _cost(double d, double pc, double denom) noexcept nogil:
    if pc == 2.0:
        return d * d / denom
    return pow(fabs(d), pc) / denom


def brute(const double[::1] y, const double[::1] u, const double[::1] x, double pc, double denom):
    cdef Py_ssize_t n = y.shape[0], m = x.shape[0], i, j, best_j
    cdef double best, v
    out = np.empty(m, dtype=np.float64)
    arg = np.empty(m, dtype=np.int64)
    cdef double[::1] o = out
    cdef long long[::1] a = arg
    with nogil:
        for i in range(m):
            best = INFINITY
            best_j = 0
            for j in range(n):
                v = u[j] + _cost(x[i] - y[j], pc, denom)
                if v < best:
                    best = v
                    best_j = j
            o[i] = best
            a[i] = best_j
    return out, arg


def envelope_p2(const double[::1] y, const double[::1] u, const double[::1] x, double denom):
    """Lower envelope of the parabolas u_j + (x - y_j)^2 / denom, O(n + m)."""
    cdef Py_ssize_t n = y.shape[0], m = x.shape[0], i, k = 0, q
    cdef double s, d
    hull_np = np.empty(n, dtype=np.int64)
    bnd_np = np.empty(n + 1, dtype=np.float64)
    out = np.empty(m, dtype=np.float64)
    arg = np.empty(m, dtype=np.int64)
    cdef long long[::1] v = hull_np
    cdef double[::1] z = bnd_np
    cdef double[::1] o = out
    cdef long long[::1] a = arg
    with nogil:
        v[0] = 0
        z[0] = -INFINITY
        z[1] = INFINITY
        for q in range(1, n):
            while True:
                # abscissa where parabola q overtakes parabola v[k]
                s = (denom * (u[q] - u[v[k]]) + y[q] * y[q] - y[v[k]] * y[v[k]]) / (
                    2.0 * (y[q] - y[v[k]])
                )
                if s <= z[k] and k > 0:
                    k -= 1
                else:
                    break
            if s <= z[k]:
                # k == 0 and q dominates everywhere
                v[0] = q
                z[1] = INFINITY
                continue
            k += 1
            v[k] = q
            z[k] = s
            z[k + 1] = INFINITY
        k = 0
        for i in range(m):
            while z[k + 1] < x[i]:
                k += 1
            d = x[i] - y[v[k]]
            o[i] = u[v[k]] + d * d / denom
            a[i] = v[k]
    return out, arg


cdef void _dc(const double* y, const double* u, const double* x, double* o, long long* a,
              Py_ssize_t qlo, Py_ssize_t qhi, Py_ssize_t clo, Py_ssize_t chi,
              double pc, double denom) noexcept nogil:
    cdef Py_ssize_t mid, j, best_j
    cdef double best, v
    if qlo > qhi:
        return
    mid = (qlo + qhi) // 2
    best = INFINITY
    best_j = clo
    for j in range(clo, chi + 1):
        v = u[j] + _cost(x[mid] - y[j], pc, denom)
        if v < best:
            best = v
            best_j = j
    o[mid] = best
    a[mid] = best_j
    _dc(y, u, x, o, a, qlo, mid - 1, clo, best_j, pc, denom)
    _dc(y, u, x, o, a, mid + 1, qhi, best_j, chi, pc, denom)


def monotone_dc(const double[::1] y, const double[::1] u, const double[::1] x, double pc, double denom):
    """Row minima of a Monge cost matrix by divide and conquer, O((n + m) log m)."""
    cdef Py_ssize_t n = y.shape[0], m = x.shape[0]
    out = np.empty(m, dtype=np.float64)
    arg = np.empty(m, dtype=np.int64)
    cdef double[::1] o = out
    cdef long long[::1] a = arg
    if m == 0:
        return out, arg
    with nogil:
        _dc(&y[0], &u[0], &x[0], &o[0], &a[0], 0, m - 1, 0, n - 1, pc, denom)
    return out, arg
