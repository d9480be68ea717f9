# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: bilinear warp gather, its exact adjoint (splat),
and the Gauss-Seidel sweep used by the nonlocal-TV proximal solver.

Mirrors _pyfallback semantics; the pair warp/splat computes identical
clamped coordinates and weights so the operators stay exact transposes.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()

NAME = "native"


def warp_bilinear(cnp.float64_t[:, ::1] src,
                  cnp.float64_t[:, ::1] dx,
                  cnp.float64_t[:, ::1] dy):
    cdef Py_ssize_t h = src.shape[0]
    cdef Py_ssize_t w = src.shape[1]
    out_arr = np.empty((h, w), dtype=np.float64)
    cdef cnp.float64_t[:, ::1] out = out_arr
    cdef Py_ssize_t x, y, x0, x1, y0, y1
    cdef double sx, sy, fx, fy, wx0, wy0
    for y in range(h):
        for x in range(w):
            sx = x + dx[y, x]
            sy = y + dy[y, x]
            if sx < 0.0:
                sx = 0.0
            elif sx > w - 1.0:
                sx = w - 1.0
            if sy < 0.0:
                sy = 0.0
            elif sy > h - 1.0:
                sy = h - 1.0
            x0 = <Py_ssize_t>floor(sx)
            y0 = <Py_ssize_t>floor(sy)
            fx = sx - x0
            fy = sy - y0
            x1 = x0 + 1
            y1 = y0 + 1
            if x1 > w - 1:
                x1 = w - 1
            if y1 > h - 1:
                y1 = h - 1
            wx0 = 1.0 - fx
            wy0 = 1.0 - fy
            out[y, x] = (wy0 * wx0 * src[y0, x0] + wy0 * fx * src[y0, x1]
                         + fy * wx0 * src[y1, x0] + fy * fx * src[y1, x1])
    return out_arr


def splat_bilinear(cnp.float64_t[:, ::1] src,
                   cnp.float64_t[:, ::1] dx,
                   cnp.float64_t[:, ::1] dy):
    cdef Py_ssize_t h = src.shape[0]
    cdef Py_ssize_t w = src.shape[1]
    out_arr = np.zeros((h, w), dtype=np.float64)
    cdef cnp.float64_t[:, ::1] out = out_arr
    cdef Py_ssize_t x, y, x0, x1, y0, y1
    cdef double sx, sy, fx, fy, wx0, wy0, r
    for y in range(h):
        for x in range(w):
            sx = x + dx[y, x]
            sy = y + dy[y, x]
            if sx < 0.0:
                sx = 0.0
            elif sx > w - 1.0:
                sx = w - 1.0
            if sy < 0.0:
                sy = 0.0
            elif sy > h - 1.0:
                sy = h - 1.0
            x0 = <Py_ssize_t>floor(sx)
            y0 = <Py_ssize_t>floor(sy)
            fx = sx - x0
            fy = sy - y0
            x1 = x0 + 1
            y1 = y0 + 1
            if x1 > w - 1:
                x1 = w - 1
            if y1 > h - 1:
                y1 = h - 1
            wx0 = 1.0 - fx
            wy0 = 1.0 - fy
            r = src[y, x]
            out[y0, x0] += wy0 * wx0 * r
            out[y0, x1] += wy0 * fx * r
            out[y1, x0] += fy * wx0 * r
            out[y1, x1] += fy * fx * r
    return out_arr


def gs_sweep(cnp.float64_t[::1] u,
             cnp.float64_t[::1] v,
             double mu,
             cnp.int64_t[::1] indptr,
             cnp.int64_t[::1] indices,
             cnp.float64_t[::1] cond):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i, t
    cdef double s, c, wgt
    for i in range(n):
        s = 0.0
        c = 0.0
        for t in range(indptr[i], indptr[i + 1]):
            wgt = cond[t]
            s += wgt * u[indices[t]]
            c += wgt
        u[i] = (mu * v[i] + s) / (mu + c)
