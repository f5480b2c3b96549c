# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled radial-derivative tables; mirrors ``pigp._pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log1p, sin, cos, M_PI

cnp.import_array()


def se_table(r, double ell, int nmax, bint grad=True):
    cdef double[::1] rv = np.ascontiguousarray(r, dtype=np.float64).ravel()
    cdef Py_ssize_t n = rv.shape[0], i
    cdef int k
    D_arr = np.empty((nmax + 1, n))
    cdef double[:, ::1] D = D_arr
    cdef double[:, ::1] G
    G_arr = None
    if grad:
        G_arr = np.empty((nmax + 1, n))
        G = G_arr
    cdef double z, z2, g, sgn, inv_l, lpow, lower
    cdef double He[6]
    inv_l = 1.0 / ell
    for i in range(n):
        z = rv[i] * inv_l
        z2 = z * z
        g = exp(-0.5 * z2)
        He[0] = 1.0
        if nmax >= 1:
            He[1] = z
        for k in range(2, nmax + 1):
            He[k] = z * He[k - 1] - (k - 1) * He[k - 2]
        sgn = 1.0
        lpow = 1.0
        for k in range(nmax + 1):
            D[k, i] = sgn * lpow * He[k] * g
            if grad:
                lower = k * z * He[k - 1] if k >= 1 else 0.0
                G[k, i] = sgn * lpow * inv_l * g * ((z2 - k) * He[k] - lower)
            sgn = -sgn
            lpow = lpow * inv_l
    return D_arr, G_arr


def rq_table(r, double ell, double alpha, bint grad=True):
    cdef double[::1] rv = np.ascontiguousarray(r, dtype=np.float64).ravel()
    cdef Py_ssize_t n = rv.shape[0], i
    D_arr = np.empty((3, n))
    cdef double[:, ::1] D = D_arr
    cdef double[:, ::1] Gl
    cdef double[:, ::1] Ga
    Gl_arr = None
    Ga_arr = None
    if grad:
        Gl_arr = np.empty((3, n))
        Ga_arr = np.empty((3, n))
        Gl = Gl_arr
        Ga = Ga_arr
    cdef double a = alpha, inv_l2 = 1.0 / (ell * ell)
    cdef double ri, u, s, ls, p0, p1, p2, h
    for i in range(n):
        ri = rv[i]
        u = ri * ri / (2.0 * a * ell * ell)
        s = 1.0 + u
        ls = log1p(u)
        p0 = exp(-a * ls)
        p1 = p0 / s
        p2 = p1 / s
        h = 1.0 - (2.0 * a + 1.0) * u
        D[0, i] = p0
        D[1, i] = -ri * inv_l2 * p1
        D[2, i] = -inv_l2 * p2 * h
        if grad:
            Gl[0, i] = p0 * 2.0 * a * u / (s * ell)
            Ga[0, i] = p0 * (-ls + u / s)
            Gl[1, i] = D[1, i] * (-2.0 / ell + 2.0 * (a + 1.0) * u / (s * ell))
            Ga[1, i] = D[1, i] * (-ls + (a + 1.0) * u / (a * s))
            Gl[2, i] = -inv_l2 * p2 * (
                h * (-2.0 / ell + 2.0 * (a + 2.0) * u / (s * ell))
                + 2.0 * (2.0 * a + 1.0) * u / ell
            )
            Ga[2, i] = -inv_l2 * p2 * (h * (-ls + (a + 2.0) * u / (a * s)) + u / a)
    return D_arr, Gl_arr, Ga_arr


def per_table(r, double ell, double period, bint grad=True):
    cdef double[::1] rv = np.ascontiguousarray(r, dtype=np.float64).ravel()
    cdef Py_ssize_t n = rv.shape[0], i
    D_arr = np.empty((3, n))
    cdef double[:, ::1] D = D_arr
    cdef double[:, ::1] Gl
    cdef double[:, ::1] Gp
    Gl_arr = None
    Gp_arr = None
    if grad:
        Gl_arr = np.empty((3, n))
        Gp_arr = np.empty((3, n))
        Gl = Gl_arr
        Gp = Gp_arr
    cdef double c = 2.0 * M_PI / period
    cdef double l2 = ell * ell, l3 = l2 * ell
    cdef double w, sw, cw, D0, A1, A2, dEl, dEp, dA1l, dA1p, dA2l, dA2p, g0l, g0p
    for i in range(n):
        w = c * rv[i]
        sw = sin(w)
        cw = cos(w)
        D0 = exp(-(1.0 - cw) / l2)
        A1 = -c * sw / l2
        A2 = A1 * A1 - c * c * cw / l2
        D[0, i] = D0
        D[1, i] = A1 * D0
        D[2, i] = A2 * D0
        if grad:
            dEl = 2.0 * (1.0 - cw) / l3
            dEp = w * sw / (period * l2)
            dA1l = 2.0 * c * sw / l3
            dA1p = c / (period * l2) * (sw + w * cw)
            dA2l = 2.0 * A1 * dA1l + 2.0 * c * c * cw / l3
            dA2p = 2.0 * A1 * dA1p - c * c / (period * l2) * (-2.0 * cw + w * sw)
            g0l = D0 * dEl
            g0p = D0 * dEp
            Gl[0, i] = g0l
            Gp[0, i] = g0p
            Gl[1, i] = dA1l * D0 + A1 * g0l
            Gp[1, i] = dA1p * D0 + A1 * g0p
            Gl[2, i] = dA2l * D0 + A2 * g0l
            Gp[2, i] = dA2p * D0 + A2 * g0p
    return D_arr, Gl_arr, Gp_arr
