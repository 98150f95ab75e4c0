# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: batched Stokes variances and nested golden-section
capacity optimizers. Same API as ``_kernels_py``."""

from libc.math cimport cos, sin, sqrt, log1p, log, M_PI

import numpy as np

cdef double INV_PHI = (sqrt(5.0) - 1.0) / 2.0
cdef double LOG2 = log(2.0)

COH_I, COH_II, COH_III, SQZ1_I, SQZ1_II, SQZ2_II, SQZ2_III = range(7)

ctypedef double (*obj_t)(double, void*) noexcept nogil


cdef struct Ctx:
    double n
    double tol
    double a      # scheme-dependent scratch values
    double b
    double c
    int failed


def stokes_variances_batch(alpha_h, alpha_v, theta, m):
    cdef const double[::1] ah = np.ascontiguousarray(alpha_h, dtype=np.float64).ravel()
    cdef const double[::1] av = np.ascontiguousarray(alpha_v, dtype=np.float64).ravel()
    cdef const double[::1] th = np.ascontiguousarray(theta, dtype=np.float64).ravel()
    cdef const double[:, :, ::1] mm = np.ascontiguousarray(m, dtype=np.float64).reshape(-1, 4, 4)
    cdef Py_ssize_t k = ah.shape[0], i
    out_arr = np.empty((k, 4))
    cdef double[:, ::1] out = out_arr
    cdef double ah2, av2, cross, t, c, s, var_v, var_h, cov
    cdef int j
    with nogil:
        for i in range(k):
            ah2 = ah[i] * ah[i]
            av2 = av[i] * av[i]
            cross = 2.0 * ah[i] * av[i]
            out[i, 0] = ah2 * mm[i, 0, 0] + av2 * mm[i, 2, 2] + cross * mm[i, 0, 2]
            out[i, 1] = ah2 * mm[i, 0, 0] + av2 * mm[i, 2, 2] - cross * mm[i, 0, 2]
            for j in range(2, 4):
                t = th[i] if j == 2 else th[i] - 0.5 * M_PI
                c = cos(t)
                s = sin(t)
                var_v = c * c * mm[i, 2, 2] + s * s * mm[i, 3, 3] - 2.0 * c * s * mm[i, 2, 3]
                var_h = c * c * mm[i, 0, 0] + s * s * mm[i, 1, 1] + 2.0 * c * s * mm[i, 0, 1]
                cov = c * c * mm[i, 0, 2] - c * s * mm[i, 0, 3] + s * c * mm[i, 1, 2] - s * s * mm[i, 1, 3]
                out[i, j] = ah2 * var_v + av2 * var_h + cross * cov
    return out_arr.reshape(np.shape(alpha_h) + (4,))


def golden_max(f, double a, double b, double tol=1e-10, int max_iter=200):
    cdef double c = b - INV_PHI * (b - a)
    cdef double d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    cdef int it
    for it in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    else:
        raise RuntimeError("golden-section search did not converge")
    return (c, fc) if fc >= fd else (d, fd)


cdef double _golden(obj_t f, void* ctx, double a, double b, double tol, double* xbest, int* failed) noexcept nogil:
    cdef double c = b - INV_PHI * (b - a)
    cdef double d = a + INV_PHI * (b - a)
    cdef double fc = f(c, ctx)
    cdef double fd = f(d, ctx)
    cdef int it = 0
    while b - a > tol:
        it += 1
        if it > 200:
            failed[0] = 1
            break
        if fc >= fd:
            b = d
            d = c
            fd = fc
            c = b - INV_PHI * (b - a)
            fc = f(c, ctx)
        else:
            a = c
            c = d
            fc = fd
            d = a + INV_PHI * (b - a)
            fd = f(d, ctx)
    if fc >= fd:
        xbest[0] = c
        return fc
    xbest[0] = d
    return fd


cdef inline double _half_log2(double x) noexcept nogil:
    return 0.5 * log1p(x) / LOG2


cpdef double squeezed_variance(double n_sq) noexcept nogil:
    cdef double root
    if n_sq <= 0.0:
        return 1.0
    root = sqrt(n_sq + 1.0) + sqrt(n_sq)
    return 1.0 / (root * root)


def half_log2(double x):
    return _half_log2(x)


# ---- coh_ii
cdef double _coh2(double s, void* p) noexcept nogil:
    cdef Ctx* ctx = <Ctx*>p
    return _half_log2(4.0 * ctx.n * s) + _half_log2(4.0 * ctx.n * (1.0 - s))


# ---- coh_iii: ctx.a = eps
cdef double _coh3_s1(double s1, void* p) noexcept nogil:
    cdef Ctx* ctx = <Ctx*>p
    return _half_log2((1.0 - ctx.a) * 4.0 * ctx.n * s1) + 2.0 * _half_log2(ctx.a * 2.0 * ctx.n * (1.0 - s1))


cdef double _coh3_eps(double eps, void* p) noexcept nogil:
    cdef Ctx* ctx = <Ctx*>p
    cdef Ctx inner = ctx[0]
    cdef double x
    inner.a = eps
    return _golden(_coh3_s1, &inner, 0.0, 1.0, ctx.tol, &x, &ctx.failed)


# ---- one squeezed dimension: ctx.n = photons in the dimension, ctx.a = transmittivity
cdef double _sqz_dim(double q, void* p) noexcept nogil:
    cdef Ctx* ctx = <Ctx*>p
    cdef double g = ctx.a
    cdef double v = squeezed_variance(q * ctx.n)
    return _half_log2(g * 4.0 * ctx.n * (1.0 - q) / (g * v + 1.0 - g))


cdef double _sqz_dim_best(double m, double gain, double tol, double* q, int* failed) noexcept nogil:
    cdef Ctx ctx
    if m <= 0.0:
        q[0] = 0.0
        return 0.0
    ctx.n = m
    ctx.a = gain
    ctx.tol = tol
    ctx.failed = 0
    cdef double best = _golden(_sqz_dim, &ctx, 0.0, 1.0, tol, q, &ctx.failed)
    if ctx.failed:
        failed[0] = 1
    return best


# ---- sqz1_ii: ctx.a = v, ctx.b = signal budget
cdef double _sqz1ii_s(double s, void* p) noexcept nogil:
    cdef Ctx* ctx = <Ctx*>p
    return _half_log2(ctx.b * s) + _half_log2(ctx.b * (1.0 - s) / ctx.a)


cdef double _sqz1ii_q(double q, void* p) noexcept nogil:
    cdef Ctx* ctx = <Ctx*>p
    cdef Ctx inner = ctx[0]
    cdef double x
    inner.a = squeezed_variance(q * ctx.n)
    inner.b = 4.0 * ctx.n * (1.0 - q)
    return _golden(_sqz1ii_s, &inner, 0.0, 1.0, ctx.tol, &x, &ctx.failed)


# ---- sqz2_ii
cdef double _sqz2ii_d(double d, void* p) noexcept nogil:
    cdef Ctx* ctx = <Ctx*>p
    cdef double q
    return (_sqz_dim_best(ctx.n * d, 1.0, ctx.tol, &q, &ctx.failed)
            + _sqz_dim_best(ctx.n * (1.0 - d), 1.0, ctx.tol, &q, &ctx.failed))


# ---- sqz2_iii: ctx.a = eps, ctx.b = s1
cdef double _sqz2iii_q(double q, void* p) noexcept nogil:
    cdef Ctx* ctx = <Ctx*>p
    cdef double eps = ctx.a, s1 = ctx.b
    cdef double m = 0.5 * ctx.n * (1.0 - s1)
    cdef double v = squeezed_variance(q * m)
    cdef double r23 = eps * 4.0 * m * (1.0 - q) / (eps * v + 1.0 - eps)
    cdef double r1 = (1.0 - eps) * 4.0 * ctx.n * s1 / ((1.0 - eps) / v + eps)
    return 2.0 * _half_log2(r23) + _half_log2(r1)


cdef double _sqz2iii_s1(double s1, void* p) noexcept nogil:
    cdef Ctx* ctx = <Ctx*>p
    cdef Ctx inner = ctx[0]
    cdef double x
    inner.b = s1
    return _golden(_sqz2iii_q, &inner, 0.0, 1.0, ctx.tol, &x, &ctx.failed)


cdef double _sqz2iii_eps(double eps, void* p) noexcept nogil:
    cdef Ctx* ctx = <Ctx*>p
    cdef Ctx inner = ctx[0]
    cdef double x
    inner.a = eps
    return _golden(_sqz2iii_s1, &inner, 0.0, 1.0, ctx.tol, &x, &ctx.failed)


def optimize_scheme(int scheme, double n, double tol=1e-10):
    cdef Ctx ctx
    cdef double bits = 0.0, x0 = 0.0, x1 = 0.0, x2 = 0.0, d
    ctx.n = n
    ctx.tol = tol
    ctx.a = 0.0
    ctx.b = 0.0
    ctx.c = 0.0
    ctx.failed = 0
    if scheme < 0 or scheme > 6:
        raise ValueError(f"unknown scheme id {scheme}")
    if n <= 0.0:
        if scheme == COH_III or scheme == SQZ2_III:
            x0 = 1.0
        return 0.0, [x0, 0.0, 0.0, 0.0]
    with nogil:
        if scheme == 0:
            bits = _half_log2(4.0 * n)
        elif scheme == 1:
            bits = _golden(_coh2, &ctx, 0.0, 1.0, tol, &x0, &ctx.failed)
        elif scheme == 2:
            bits = _golden(_coh3_eps, &ctx, 0.0, 1.0, tol, &x0, &ctx.failed)
            ctx.a = x0
            _golden(_coh3_s1, &ctx, 0.0, 1.0, tol, &x1, &ctx.failed)
        elif scheme == 3:
            bits = _sqz_dim_best(n, 1.0, tol, &x0, &ctx.failed)
        elif scheme == 4:
            bits = _golden(_sqz1ii_q, &ctx, 0.0, 1.0, tol, &x0, &ctx.failed)
            ctx.a = squeezed_variance(x0 * n)
            ctx.b = 4.0 * n * (1.0 - x0)
            _golden(_sqz1ii_s, &ctx, 0.0, 1.0, tol, &x1, &ctx.failed)
        elif scheme == 5:
            bits = _golden(_sqz2ii_d, &ctx, 0.0, 1.0, tol, &x0, &ctx.failed)
            _sqz_dim_best(n * x0, 1.0, tol, &x1, &ctx.failed)
            _sqz_dim_best(n * (1.0 - x0), 1.0, tol, &x2, &ctx.failed)
        else:
            bits = _golden(_sqz2iii_eps, &ctx, 0.0, 1.0, tol, &x0, &ctx.failed)
            ctx.a = x0
            _golden(_sqz2iii_s1, &ctx, 0.0, 1.0, tol, &x1, &ctx.failed)
            ctx.b = x1
            _golden(_sqz2iii_q, &ctx, 0.0, 1.0, tol, &x2, &ctx.failed)
    if ctx.failed:
        raise RuntimeError("golden-section search did not converge")
    return bits, [x0, x1, x2, 0.0]
