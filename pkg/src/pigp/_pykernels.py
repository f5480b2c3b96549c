"""Pure numpy radial-derivative tables (fallback for ``pigp._ckernels``).

Every function takes a flat float64 array of signed lags ``r = p - q`` and
returns ``D[n] = d^n k(r) / dr^n`` for a unit-variance stationary kernel,
together with the derivative of each row with respect to the shape
parameters. Both backends must agree to round-off; see tests/test_backend.py.
"""

import numpy as np


def _hermite(z, nmax):
    """Probabilists' Hermite polynomials He_0..He_nmax evaluated at z."""
    He = np.empty((nmax + 1,) + z.shape)
    He[0] = 1.0
    if nmax >= 1:
        He[1] = z
    for n in range(2, nmax + 1):
        He[n] = z * He[n - 1] - (n - 1) * He[n - 2]
    return He


def se_table(r, ell, nmax, grad=True):
    r = np.ascontiguousarray(r, dtype=np.float64)
    z = r / ell
    g = np.exp(-0.5 * z * z)
    He = _hermite(z, nmax)
    D = np.empty((nmax + 1, r.size))
    G = np.empty((nmax + 1, r.size)) if grad else None
    z2 = z * z
    for n in range(nmax + 1):
        s = (-1.0) ** n
        D[n] = s * ell ** (-n) * He[n] * g
        if grad:
            lower = n * z * He[n - 1] if n >= 1 else 0.0
            G[n] = s * ell ** (-n - 1) * g * ((z2 - n) * He[n] - lower)
    return D, G


def rq_table(r, ell, alpha, grad=True):
    r = np.ascontiguousarray(r, dtype=np.float64)
    a = alpha
    u = r * r / (2.0 * a * ell * ell)
    s = 1.0 + u
    ls = np.log1p(u)
    p0 = np.exp(-a * ls)
    p1 = p0 / s
    p2 = p1 / s
    h = 1.0 - (2.0 * a + 1.0) * u
    inv_l2 = 1.0 / (ell * ell)
    D = np.empty((3, r.size))
    D[0] = p0
    D[1] = -r * inv_l2 * p1
    D[2] = -inv_l2 * p2 * h
    if not grad:
        return D, None, None
    Gl = np.empty_like(D)
    Ga = np.empty_like(D)
    Gl[0] = D[0] * 2.0 * a * u / (s * ell)
    Ga[0] = D[0] * (-ls + u / s)
    Gl[1] = D[1] * (-2.0 / ell + 2.0 * (a + 1.0) * u / (s * ell))
    Ga[1] = D[1] * (-ls + (a + 1.0) * u / (a * s))
    Gl[2] = -inv_l2 * p2 * (
        h * (-2.0 / ell + 2.0 * (a + 2.0) * u / (s * ell)) + 2.0 * (2.0 * a + 1.0) * u / ell
    )
    Ga[2] = -inv_l2 * p2 * (h * (-ls + (a + 2.0) * u / (a * s)) + u / a)
    return D, Gl, Ga


def per_table(r, ell, period, grad=True):
    r = np.ascontiguousarray(r, dtype=np.float64)
    c = 2.0 * np.pi / period
    w = c * r
    sw = np.sin(w)
    cw = np.cos(w)
    l2 = ell * ell
    D0 = np.exp(-(1.0 - cw) / l2)
    A1 = -c * sw / l2
    A2 = A1 * A1 - c * c * cw / l2
    D = np.empty((3, r.size))
    D[0] = D0
    D[1] = A1 * D0
    D[2] = A2 * D0
    if not grad:
        return D, None, None
    l3 = l2 * ell
    dE_l = 2.0 * (1.0 - cw) / l3
    dE_p = w * sw / (period * l2)
    dA1_l = 2.0 * c * sw / l3
    dA1_p = c / (period * l2) * (sw + w * cw)
    dA2_l = 2.0 * A1 * dA1_l + 2.0 * c * c * cw / l3
    dA2_p = 2.0 * A1 * dA1_p - c * c / (period * l2) * (-2.0 * cw + w * sw)
    Gl = np.empty_like(D)
    Gp = np.empty_like(D)
    Gl[0] = D0 * dE_l
    Gp[0] = D0 * dE_p
    Gl[1] = dA1_l * D0 + A1 * Gl[0]
    Gp[1] = dA1_p * D0 + A1 * Gp[0]
    Gl[2] = dA2_l * D0 + A2 * Gl[0]
    Gp[2] = dA2_p * D0 + A2 * Gp[0]
    return D, Gl, Gp
