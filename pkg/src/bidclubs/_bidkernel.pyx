# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled backend for the hot bid-quadrature kernels.

Mirrors ``bidclubs._bidkernel_py`` exactly; see that module for the
contract.  The CUSTOM family calls back into the Python cdf and is
correspondingly slower; the built-in families are evaluated inline.
"""

from libc.math cimport pow

import numpy as np

BACKEND = "compiled"

UNIFORM = 0
POWER = 1
CUSTOM = 2

cdef double[5] _GL_X
cdef double[5] _GL_W
_GL_X[0] = -0.9061798459386640; _GL_X[1] = -0.5384693101056831
_GL_X[2] = 0.0
_GL_X[3] = 0.5384693101056831; _GL_X[4] = 0.9061798459386640
_GL_W[0] = 0.2369268850561891; _GL_W[1] = 0.4786286704993665
_GL_W[2] = 0.5688888888888889
_GL_W[3] = 0.4786286704993665; _GL_W[4] = 0.2369268850561891


cdef inline double _cdf_c(int kind, double alpha, object cdf,
                          double lo, double hi, double u):
    if u <= lo:
        return 0.0
    if u >= hi:
        return 1.0
    if kind == UNIFORM:
        return (u - lo) / (hi - lo)
    if kind == POWER:
        return pow((u - lo) / (hi - lo), alpha)
    cdef double r = <double> cdf(u)
    if r < 0.0:
        return 0.0
    if r > 1.0:
        return 1.0
    return r


def cdf_one(kind, alpha, cdf, lo, hi, u):
    return _cdf_c(kind, alpha, cdf, lo, hi, u)


def cdf_many(kind, alpha, cdf, lo, hi, us):
    us = np.asarray(us, dtype=np.float64)
    if kind == UNIFORM:
        out = (us - lo) / (hi - lo)
    elif kind == POWER:
        out = np.clip((us - lo) / (hi - lo), 0.0, 1.0) ** alpha
    else:
        out = np.asarray(cdf(us), dtype=np.float64)
    return np.clip(out, 0.0, 1.0)


cdef inline double _g(int kind, double expnt, object cdf, double invfv,
                      double lo, double hi, double scale, double u):
    cdef double r
    if kind == CUSTOM:
        r = invfv * (<double> cdf(u))
        if r <= 0.0:
            return 0.0
        if r > 1.0:
            r = 1.0
        return pow(r, expnt)
    r = scale * (u - lo)
    if r <= 0.0:
        return 0.0
    if r > 1.0:
        r = 1.0
    return pow(r, expnt)


cdef double _rec(int kind, double expnt, object cdf, double invfv,
                 double lo, double hi, double scale,
                 double a, double m, double b,
                 double fa, double fm, double fb,
                 double whole, double tol, int depth):
    cdef double lm = 0.5 * (a + m)
    cdef double rm = 0.5 * (m + b)
    cdef double flm = _g(kind, expnt, cdf, invfv, lo, hi, scale, lm)
    cdef double frm = _g(kind, expnt, cdf, invfv, lo, hi, scale, rm)
    cdef double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    cdef double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    cdef double err = left + right - whole
    if depth <= 0 or (err if err >= 0.0 else -err) <= 15.0 * tol:
        return left + right + err / 15.0
    cdef double half = 0.5 * tol
    return (_rec(kind, expnt, cdf, invfv, lo, hi, scale,
                 a, lm, m, fa, flm, fm, left, half, depth - 1)
            + _rec(kind, expnt, cdf, invfv, lo, hi, scale,
                   m, rm, b, fm, frm, fb, right, half, depth - 1))


cdef double _shading_c(int kind, double alpha, object cdf, double lo,
                       double hi, double v, int n, double tol, int max_depth):
    if v <= lo:
        return 0.0
    cdef double fv = _cdf_c(kind, alpha, cdf, lo, hi, v)
    if fv <= 0.0:
        return 0.0
    cdef double expnt
    cdef double invfv = 0.0
    cdef double scale = 0.0
    if kind == UNIFORM:
        expnt = n - 1.0
        scale = 1.0 / (v - lo)
    elif kind == POWER:
        expnt = alpha * (n - 1.0)
        scale = 1.0 / (v - lo)
    else:
        expnt = n - 1.0
        invfv = 1.0 / fv
    cdef double a = lo
    cdef double b = v
    cdef double m = 0.5 * (a + b)
    cdef double fm = _g(kind, expnt, cdf, invfv, lo, hi, scale, m)
    cdef double whole = (b - a) / 6.0 * (0.0 + 4.0 * fm + 1.0)
    return _rec(kind, expnt, cdf, invfv, lo, hi, scale,
                a, m, b, 0.0, fm, 1.0, whole, tol, max_depth)


def shading_scalar(kind, alpha, cdf, lo, hi, v, n, tol, max_depth):
    """Adaptive-Simpson value of integral_lo^v (F(u)/F(v))**(n-1) du."""
    return _shading_c(kind, alpha, cdf, lo, hi, v, n, tol, max_depth)


def shading_many(kind, alpha, cdf, lo, hi, vs, n, tol, max_depth):
    vs = np.ascontiguousarray(vs, dtype=np.float64)
    out = np.empty(vs.shape, dtype=np.float64)
    cdef double[::1] src = vs.ravel()
    cdef double[::1] dst = out.ravel()
    cdef Py_ssize_t i
    cdef int kd = kind
    cdef double al = alpha
    cdef double l = lo
    cdef double h = hi
    cdef int nn = n
    cdef double tl = tol
    cdef int md = max_depth
    for i in range(src.shape[0]):
        dst[i] = _shading_c(kd, al, cdf, l, h, src[i], nn, tl, md)
    return out


def prefix_table(kind, alpha, cdf, lo, hi, n, ncells):
    """Cumulative integral of F(u)**(n-1) at ncells+1 uniform cell edges."""
    table = np.empty(ncells + 1, dtype=np.float64)
    cdef double[::1] t = table
    cdef int kd = kind
    cdef double al = alpha
    cdef double l = lo
    cdef double h = hi
    cdef double p = n - 1.0
    cdef Py_ssize_t nc = ncells
    cdef double step = (h - l) / nc
    cdef Py_ssize_t i
    cdef int j
    cdef double a, mid, half, acc, node, total
    total = 0.0
    t[0] = 0.0
    for i in range(nc):
        a = l + i * step
        mid = a + 0.5 * step
        half = 0.5 * step
        acc = 0.0
        for j in range(5):
            node = mid + half * _GL_X[j]
            acc += _GL_W[j] * pow(_cdf_c(kd, al, cdf, l, h, node), p)
        total += acc * half
        t[i + 1] = total
    return table


def integral_from_table(table, kind, alpha, cdf, lo, hi, n, vs):
    """Integral of F(u)**(n-1) over [lo, v] for each v, using a prefix table."""
    vs = np.ascontiguousarray(vs, dtype=np.float64)
    out = np.empty(vs.shape, dtype=np.float64)
    cdef double[::1] t = table
    cdef double[::1] src = vs.ravel()
    cdef double[::1] dst = out.ravel()
    cdef int kd = kind
    cdef double al = alpha
    cdef double l = lo
    cdef double h = hi
    cdef double p = n - 1.0
    cdef Py_ssize_t nc = t.shape[0] - 1
    cdef double step = (h - l) / nc
    cdef Py_ssize_t i, idx
    cdef int j
    cdef double v, a, mid, half, acc, node, pos
    for i in range(src.shape[0]):
        v = src[i]
        pos = (v - l) / step
        if pos < 0.0:
            pos = 0.0
        elif pos > nc:
            pos = nc
        idx = <Py_ssize_t> pos
        if idx > nc - 1:
            idx = nc - 1
        a = l + idx * step
        mid = 0.5 * (a + v)
        half = 0.5 * (v - a)
        acc = 0.0
        for j in range(5):
            node = mid + half * _GL_X[j]
            acc += _GL_W[j] * pow(_cdf_c(kd, al, cdf, l, h, node), p)
        dst[i] = t[idx] + acc * half
    return out
