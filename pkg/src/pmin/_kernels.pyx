# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot loops in :mod:`pmin._kernels_py`.

Same signatures, same floating-point operation order where it matters
(bisection), so both backends return identical roots.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sqrt, fabs, hypot, NAN, INFINITY

cnp.import_array()

ctypedef cnp.float64_t f64


cdef inline double _resid(double S, double th1, double d, double d1,
                          double x, double x1, double g1) noexcept nogil:
    cdef double w = S + x
    return (w * w + d * d) * th1 + (2.0 * S + x) * d1 + g1 - d * x1


def singular_grid(const f64[::1] s, const f64[::1] dtheta, const f64[::1] delta,
                  const f64[::1] ddelta, const f64[::1] xi, const f64[::1] dxi,
                  const f64[::1] dgamma):
    cdef Py_ssize_t nt = dtheta.shape[0], ns = s.shape[0], i, j
    out = np.empty((nt, ns))
    cdef f64[:, ::1] o = out
    with nogil:
        for i in range(nt):
            for j in range(ns):
                o[i, j] = _resid(s[j], dtheta[i], delta[i], ddelta[i], xi[i], dxi[i], dgamma[i])
    return out


def immersion_grid(const f64[::1] s, const f64[::1] dtheta, const f64[::1] delta,
                   const f64[::1] ddelta, const f64[::1] xi, const f64[::1] dxi,
                   const f64[::1] dgamma):
    cdef Py_ssize_t nt = dtheta.shape[0], ns = s.shape[0], i, j
    ra = np.empty((nt, ns))
    rb = np.empty((nt, ns))
    cdef f64[:, ::1] a = ra
    cdef f64[:, ::1] b = rb
    cdef double S
    with nogil:
        for i in range(nt):
            for j in range(ns):
                S = s[j]
                a[i, j] = (S + xi[i]) * dtheta[i] + ddelta[i]
                b[i, j] = S * ddelta[i] + dgamma[i] - delta[i] * (dxi[i] - delta[i] * dtheta[i])
    return ra, rb


def cross_grid(const f64[::1] s, const f64[::1] theta, const f64[::1] dtheta,
               const f64[::1] delta, const f64[::1] ddelta, const f64[::1] xi,
               const f64[::1] dxi, const f64[::1] dgamma):
    cdef Py_ssize_t nt = dtheta.shape[0], ns = s.shape[0], i, j
    out = np.empty((nt, ns, 3))
    cdef f64[:, :, ::1] o = out
    cdef double c, sn, A, B, C, d
    with nogil:
        for i in range(nt):
            c = cos(theta[i])
            sn = sin(theta[i])
            d = delta[i]
            B = dxi[i] - d * dtheta[i]
            for j in range(ns):
                A = (s[j] + xi[i]) * dtheta[i] + ddelta[i]
                C = s[j] * ddelta[i] + dgamma[i] - d * B
                o[i, j, 0] = -c * C - A * d * sn
                o[i, j, 1] = -sn * C + A * d * c
                o[i, j, 2] = A
    return out


def bisect_singular(lo_in, hi_in, const f64[::1] dtheta, const f64[::1] delta,
                    const f64[::1] ddelta, const f64[::1] xi, const f64[::1] dxi,
                    const f64[::1] dgamma, double tol, int maxiter):
    cdef f64[::1] lo = np.array(lo_in, dtype=np.float64)
    cdef f64[::1] hi = np.array(hi_in, dtype=np.float64)
    cdef Py_ssize_t n = lo.shape[0], k
    root = np.empty(n)
    resid = np.empty(n)
    cdef f64[::1] r = root
    cdef f64[::1] f = resid
    cdef double a, b, fa, m, fm
    cdef int it
    with nogil:
        for k in range(n):
            a = lo[k]
            b = hi[k]
            fa = _resid(a, dtheta[k], delta[k], ddelta[k], xi[k], dxi[k], dgamma[k])
            m = 0.5 * (a + b)
            fm = _resid(m, dtheta[k], delta[k], ddelta[k], xi[k], dxi[k], dgamma[k])
            for it in range(maxiter):
                m = 0.5 * (a + b)
                fm = _resid(m, dtheta[k], delta[k], ddelta[k], xi[k], dxi[k], dgamma[k])
                if fabs(fm) < tol or m <= a or m >= b:
                    break
                if (fm < 0.0) == (fa < 0.0):
                    a = m
                    fa = fm
                else:
                    b = m
            r[k] = m
            f[k] = fm
    return root, resid


def pair_gaps(const f64[::1] theta, const f64[::1] alpha, const f64[::1] beta,
              const f64[::1] gamma, double eps_parallel):
    cdef Py_ssize_t n = theta.shape[0], i, j
    gap = np.empty((n, n))
    sin_psi = np.empty((n, n))
    cdef f64[:, ::1] g = gap
    cdef f64[:, ::1] sp = sin_psi
    cdef f64[::1] c = np.cos(theta)
    cdef f64[::1] sn = np.sin(theta)
    cdef double da, db, first, cr, sps
    with nogil:
        for i in range(n):
            for j in range(n):
                sps = sn[j] * c[i] - c[j] * sn[i]
                sp[i, j] = sps
                if fabs(sps) < eps_parallel:
                    g[i, j] = NAN
                    continue
                da = alpha[j] - alpha[i]
                db = beta[j] - beta[i]
                first = -(da * c[j] + db * sn[j]) * (da * c[i] + db * sn[i])
                cr = alpha[j] * beta[i] - alpha[i] * beta[j]
                g[i, j] = first / sps - cr + (gamma[j] - gamma[i])
    return gap, sin_psi


cdef inline double _min_norm_step(double a, double b, double c, double d,
                                  double v1, double v2) noexcept nogil:
    cdef double det = a * d - b * c
    cdef double fro2 = a * a + b * b + c * c + d * d
    cdef double big = fro2 if fro2 > 1e-300 else 1e-300
    if fabs(det) > 1e-12 * big:
        return hypot((d * v1 - b * v2) / det, (-c * v1 + a * v2) / det)
    if fro2 > 0:
        return hypot((a * v1 + c * v2) / fro2, (b * v1 + d * v2) / fro2)
    return INFINITY


def pde_divergence(const f64[:, :] u, const f64[::1] x, const f64[::1] y, double h):
    cdef Py_ssize_t nx = x.shape[0], ny = y.shape[0], i, j
    cdef double inv2h = 1.0 / (2.0 * h)
    vx_a = np.empty((nx - 2, ny - 2))
    vy_a = np.empty((nx - 2, ny - 2))
    nrm_a = np.empty((nx - 2, ny - 2))
    nxa = np.empty((nx - 2, ny - 2))
    nya = np.empty((nx - 2, ny - 2))
    cdef f64[:, ::1] vx = vx_a
    cdef f64[:, ::1] vy = vy_a
    cdef f64[:, ::1] nrm = nrm_a
    cdef f64[:, ::1] nX = nxa
    cdef f64[:, ::1] nY = nya
    res_a = np.empty((nx - 4, ny - 4))
    dist_a = np.empty((nx - 4, ny - 4))
    cdef f64[:, ::1] res = res_a
    cdef f64[:, ::1] dist = dist_a
    with nogil:
        for i in range(1, nx - 1):
            for j in range(1, ny - 1):
                vx[i - 1, j - 1] = (u[i + 1, j] - u[i - 1, j]) * inv2h - y[j]
                vy[i - 1, j - 1] = (u[i, j + 1] - u[i, j - 1]) * inv2h + x[i]
                nrm[i - 1, j - 1] = hypot(vx[i - 1, j - 1], vy[i - 1, j - 1])
                nX[i - 1, j - 1] = vx[i - 1, j - 1] / nrm[i - 1, j - 1]
                nY[i - 1, j - 1] = vy[i - 1, j - 1] / nrm[i - 1, j - 1]
        for i in range(1, nx - 3):
            for j in range(1, ny - 3):
                res[i - 1, j - 1] = ((nX[i + 1, j] - nX[i - 1, j]) * inv2h
                                     + (nY[i, j + 1] - nY[i, j - 1]) * inv2h)
                dist[i - 1, j - 1] = _min_norm_step(
                    (vx[i + 1, j] - vx[i - 1, j]) * inv2h,
                    (vx[i, j + 1] - vx[i, j - 1]) * inv2h,
                    (vy[i + 1, j] - vy[i - 1, j]) * inv2h,
                    (vy[i, j + 1] - vy[i, j - 1]) * inv2h,
                    vx[i, j], vy[i, j])
    return res_a, nrm_a[1:-1, 1:-1].copy(), dist_a
