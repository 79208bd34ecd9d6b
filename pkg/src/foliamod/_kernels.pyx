# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-leaf solver: minimize sum(c * x**p) over the unit simplex."""

import numpy as np

from libc.math cimport fabs, pow
from libc.stdlib cimport free, malloc, qsort

cdef double ARMIJO = 1e-4
cdef double TINY = 1e-300
cdef double SCALE_FLOOR = 1e-3
cdef Py_ssize_t MAX_HALVINGS = 60


ctypedef struct Breakpoint:
    double key
    Py_ssize_t idx


cdef int _cmp_desc(const void* a, const void* b) noexcept nogil:
    cdef double x = (<const Breakpoint*>a).key
    cdef double y = (<const Breakpoint*>b).key
    if x > y:
        return -1
    if x < y:
        return 1
    # stable tie-break keeps the result independent of the qsort implementation
    return ((<const Breakpoint*>a).idx > (<const Breakpoint*>b).idx) - \
           ((<const Breakpoint*>a).idx < (<const Breakpoint*>b).idx)


cdef void _project(const double* z, const double* D, double* out, Breakpoint* bp,
                   Py_ssize_t n) noexcept nogil:
    # argmin sum (x - z)^2 / D  s.t.  x >= 0, sum x = 1
    cdef Py_ssize_t i, k
    cdef double sz = 0.0, sd = 0.0, theta = 0.0, cand
    for i in range(n):
        bp[i].key = z[i] / D[i]
        bp[i].idx = i
    qsort(bp, n, sizeof(Breakpoint), _cmp_desc)
    for k in range(n):
        i = bp[k].idx
        sz += z[i]
        sd += D[i]
        cand = (sz - 1.0) / sd
        if bp[k].key > cand:
            theta = cand
    for i in range(n):
        cand = z[i] - theta * D[i]
        out[i] = cand if cand > 0.0 else 0.0


cdef double _objective(const double* c, const double* x, double p, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0
    for i in range(n):
        if x[i] > 0.0:
            s += c[i] * pow(x[i], p)
    return s


cdef void _scaled_gradient(const double* c, const double* x, double p, Py_ssize_t n,
                           double* g, double* D) noexcept nogil:
    cdef Py_ssize_t i
    cdef double xi, mean = 0.0, floor
    for i in range(n):
        mean += x[i]
    floor = SCALE_FLOOR * mean / n
    for i in range(n):
        xi = x[i] if x[i] > TINY else TINY
        g[i] = p * c[i] * pow(xi, p - 1.0)
        # a component clipped to zero would never move again without a floor
        xi = x[i] if x[i] > 0.0 else floor
        D[i] = pow(xi, 2.0 - p) / (p * (p - 1.0) * c[i])


cdef int _solve(const double* c, double* x, double p, Py_ssize_t n, Py_ssize_t max_iters,
                double ftol, double gtol, double* history, Py_ssize_t* iters) noexcept nogil:
    cdef double* g = <double*>malloc(n * sizeof(double))
    cdef double* D = <double*>malloc(n * sizeof(double))
    cdef double* z = <double*>malloc(n * sizeof(double))
    cdef double* d = <double*>malloc(n * sizeof(double))
    cdef double* xt = <double*>malloc(n * sizeof(double))
    cdef Breakpoint* bp = <Breakpoint*>malloc(n * sizeof(Breakpoint))
    cdef Py_ssize_t i, it = 0, k
    cdef double F, Ft = 0.0, gd, lam, pg, xmax
    cdef int status = 1
    if g == NULL or D == NULL or z == NULL or d == NULL or xt == NULL or bp == NULL:
        status = 2
    else:
        F = _objective(c, x, p, n)
        history[0] = F
        while True:
            _scaled_gradient(c, x, p, n, g, D)
            for i in range(n):
                z[i] = x[i] - D[i] * g[i]
            _project(z, D, d, bp, n)
            pg = 0.0
            xmax = 0.0
            gd = 0.0
            for i in range(n):
                d[i] -= x[i]
                gd += g[i] * d[i]
                if fabs(d[i]) > pg:
                    pg = fabs(d[i])
                if x[i] > xmax:
                    xmax = x[i]
            if pg <= gtol * xmax:
                status = 0
                break
            if it >= max_iters:
                status = 1
                break
            lam = 1.0
            for k in range(MAX_HALVINGS):
                for i in range(n):
                    xt[i] = x[i] + lam * d[i]
                    if xt[i] < 0.0:
                        xt[i] = 0.0
                Ft = _objective(c, xt, p, n)
                if Ft <= F + ARMIJO * lam * gd:
                    break
                lam *= 0.5
            if not Ft <= F:
                # no decrease representable in floating point
                status = 0
                break
            it += 1
            history[it] = Ft
            for i in range(n):
                x[i] = xt[i]
            if F - Ft <= ftol * fabs(Ft):
                F = Ft
                status = 0
                break
            F = Ft
    iters[0] = it
    free(g); free(D); free(z); free(d); free(xt); free(bp)
    return status


def project_simplex(z, scale=None):
    """Projection onto the unit simplex in the norm ``sum((x - z)**2 / scale)``.

    With ``scale=None`` this is the Euclidean projection.
    """
    cdef double[::1] zz = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t n = zz.shape[0]
    if scale is None:
        scale = np.ones(n)
    cdef double[::1] dd = np.ascontiguousarray(scale, dtype=np.float64)
    if dd.shape[0] != n:
        raise ValueError("scale must match z")
    out = np.empty(n)
    cdef double[::1] oo = out
    cdef Breakpoint* bp = <Breakpoint*>malloc(n * sizeof(Breakpoint))
    if bp == NULL:
        raise MemoryError()
    _project(&zz[0], &dd[0], &oo[0], bp, n)
    free(bp)
    return out


def solve_simplex(c, x0, double p, Py_ssize_t max_iters, double ftol, double gtol):
    """Diagonally scaled gradient projection with Armijo halving from step 1.

    Returns ``(x, iterations, status, history)``; status 0 means converged.
    """
    cdef double[::1] cc = np.ascontiguousarray(c, dtype=np.float64)
    x = np.array(x0, dtype=np.float64, copy=True)
    cdef double[::1] xx = x
    cdef Py_ssize_t n = cc.shape[0]
    hist = np.full(max_iters + 1, np.nan)
    cdef double[::1] hh = hist
    cdef Py_ssize_t iters = 0
    cdef int status
    with nogil:
        status = _solve(&cc[0], &xx[0], p, n, max_iters, ftol, gtol, &hh[0], &iters)
    if status == 2:
        raise MemoryError()
    return x, int(iters), int(status), hist[: iters + 1].copy()
