# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for the scalar-projected dipole Green function.

Mirrors ``qms._kernels_py`` one-to-one; ``qms.kernels`` picks whichever is
available at import time.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sqrt, exp, M_PI

cnp.import_array()


cdef inline void _green(double dx, double dy, double dz,
                        double ax, double ay, double az, double k,
                        double* re, double* im) noexcept nogil:
    cdef double r2 = dx * dx + dy * dy + dz * dz
    cdef double r, kr, kr2, c2, br, bi, pref, cr, ci
    if r2 == 0.0:
        re[0] = 0.0
        im[0] = 0.0
        return
    r = sqrt(r2)
    kr = k * r
    kr2 = kr * kr
    c2 = dx * ax + dy * ay + dz * az
    c2 = c2 * c2 / r2
    br = 1.0 - 1.0 / kr2 + c2 * (3.0 / kr2 - 1.0)
    bi = (1.0 - 3.0 * c2) / kr
    pref = 1.0 / (4.0 * M_PI * r)
    cr = cos(kr) * pref
    ci = sin(kr) * pref
    re[0] = cr * br - ci * bi
    im[0] = cr * bi + ci * br


def green_block(const double[:, ::1] obs, const double[:, ::1] src, const double[::1] axis, double k):
    cdef Py_ssize_t m = obs.shape[0], n = src.shape[0], i, j
    cdef double re, im
    out = np.empty((m, n), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    with nogil:
        for i in range(m):
            for j in range(n):
                _green(obs[i, 0] - src[j, 0], obs[i, 1] - src[j, 1], obs[i, 2] - src[j, 2],
                       axis[0], axis[1], axis[2], k, &re, &im)
                o[i, j] = re + 1j * im
    return out


def green_matrix(const double[:, ::1] pos, const double[::1] axis, double k):
    cdef Py_ssize_t n = pos.shape[0], i, j
    cdef double re, im
    out = np.zeros((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                _green(pos[i, 0] - pos[j, 0], pos[i, 1] - pos[j, 1], pos[i, 2] - pos[j, 2],
                       axis[0], axis[1], axis[2], k, &re, &im)
                o[i, j] = re + 1j * im
                o[j, i] = o[i, j]
    return out


def green_project(const double[:, ::1] obs, const double complex[::1] weights,
                  const double[:, ::1] src, const double[::1] axis, double k):
    cdef Py_ssize_t m = obs.shape[0], n = src.shape[0], i, j
    cdef double re, im, accr, acci, wr, wi
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    with nogil:
        for j in range(n):
            accr = 0.0
            acci = 0.0
            for i in range(m):
                _green(obs[i, 0] - src[j, 0], obs[i, 1] - src[j, 1], obs[i, 2] - src[j, 2],
                       axis[0], axis[1], axis[2], k, &re, &im)
                wr = weights[i].real
                wi = weights[i].imag
                accr += wr * re - wi * im
                acci += wr * im + wi * re
            o[j] = accr + 1j * acci
    return out


def lattice_sum(double spacing, double kx, double ky, const double[::1] axis,
                double k, double sigma, double radius):
    cdef long nmax = <long>(radius / spacing) + 1
    cdef long i, j
    cdef double x, y, r2, rad2 = radius * radius, w, ph, re, im
    cdef double accr = 0.0, acci = 0.0, inv_s2 = 1.0 / (sigma * sigma)
    with nogil:
        for i in range(-nmax, nmax + 1):
            x = i * spacing
            for j in range(-nmax, nmax + 1):
                if i == 0 and j == 0:
                    continue
                y = j * spacing
                r2 = x * x + y * y
                if r2 > rad2:
                    continue
                _green(x, y, 0.0, axis[0], axis[1], axis[2], k, &re, &im)
                w = exp(-r2 * inv_s2)
                ph = kx * x + ky * y
                accr += w * (cos(ph) * re - sin(ph) * im)
                acci += w * (cos(ph) * im + sin(ph) * re)
    return accr + 1j * acci
