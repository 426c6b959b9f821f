# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels (see ``_fallback.py`` for the reference)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, sin, sqrt, M_PI

cnp.import_array()


def laurent_mul(a, b):
    # complex arithmetic spelled out in real parts: avoids the C99 __muldc3 path
    ac = np.ascontiguousarray(a, dtype=np.complex128)
    bc = np.ascontiguousarray(b, dtype=np.complex128)
    cdef Py_ssize_t na = ac.shape[0], nb = bc.shape[0], i, j
    if na == 0 or nb == 0:
        return np.zeros(0, dtype=np.complex128)
    cdef const double[::1] av = ac.view(np.float64)
    cdef const double[::1] bv = bc.view(np.float64)
    out = np.zeros(na + nb - 1, dtype=np.complex128)
    cdef double[::1] ov = out.view(np.float64)
    cdef double ar, ai, br, bi
    for i in range(na):
        ar = av[2 * i]
        ai = av[2 * i + 1]
        if ar == 0.0 and ai == 0.0:
            continue
        for j in range(nb):
            br = bv[2 * j]
            bi = bv[2 * j + 1]
            ov[2 * (i + j)] += ar * br - ai * bi
            ov[2 * (i + j) + 1] += ar * bi + ai * br
    return out


def kelvin_boundary_matrices(zeta, dzeta, t):
    cdef const double complex[::1] z = np.ascontiguousarray(zeta, dtype=np.complex128)
    cdef const double complex[::1] dz = np.ascontiguousarray(dzeta, dtype=np.complex128)
    cdef const double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef Py_ssize_t n = z.shape[0], p, q
    R = np.empty((n, n), dtype=np.float64)
    U = np.empty((n, n), dtype=np.complex128)
    cdef double[:, ::1] Rv = R
    cdef double complex[:, ::1] Uv = U
    cdef double complex d
    cdef double ad, s, sp
    for p in range(n):
        for q in range(n):
            if p == q:
                ad = sqrt(dz[p].real * dz[p].real + dz[p].imag * dz[p].imag)
                Rv[p, q] = log(ad)
                Uv[p, q] = dz[p] / ad
            else:
                d = z[p] - z[q]
                ad = sqrt(d.real * d.real + d.imag * d.imag)
                s = sin(0.5 * (tv[p] - tv[q]))
                Rv[p, q] = log(ad) - 0.5 * log(4.0 * s * s)
                Uv[p, q] = d / ad
    return R, U


def kelvin_apply(targets, zeta, psi, double weight, double alpha, double beta):
    cdef const double complex[::1] tg = np.ascontiguousarray(np.atleast_1d(targets), dtype=np.complex128)
    cdef const double complex[::1] z = np.ascontiguousarray(zeta, dtype=np.complex128)
    cdef const double complex[::1] ps = np.ascontiguousarray(psi, dtype=np.complex128)
    cdef Py_ssize_t m = tg.shape[0], n = z.shape[0], p, q
    out = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef double x1, x2, r2, lg, g11, g12, g22, s1, s2, c = 1.0 / (2.0 * M_PI)
    for p in range(m):
        s1 = 0.0
        s2 = 0.0
        for q in range(n):
            x1 = tg[p].real - z[q].real
            x2 = tg[p].imag - z[q].imag
            r2 = x1 * x1 + x2 * x2
            lg = 0.5 * log(r2)
            g11 = c * (alpha * lg - beta * x1 * x1 / r2)
            g12 = -c * beta * x1 * x2 / r2
            g22 = c * (alpha * lg - beta * x2 * x2 / r2)
            s1 += g11 * ps[q].real + g12 * ps[q].imag
            s2 += g12 * ps[q].real + g22 * ps[q].imag
        ov[p] = weight * s1 + 1j * weight * s2
    return out
