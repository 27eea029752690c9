# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled cosine-basis kernels.

Both routines walk the frequency index with the angle-addition rotation
cos((j+1)t) = cos(jt)cos(t) - sin(jt)sin(t), which keeps the rounding
error linear in j.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, M_PI

cnp.import_array()


def cosine_moments(const double[::1] y, const double[::1] v, Py_ssize_t jmax):
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t l, j
    cdef double c1, s1, c, s, cn, vl
    cdef double root2 = sqrt(2.0)
    out_arr = np.zeros(jmax + 1, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for l in range(n):
            vl = v[l]
            out[0] += vl
            if jmax == 0:
                continue
            c1 = cos(M_PI * y[l])
            s1 = sin(M_PI * y[l])
            c = c1
            s = s1
            out[1] += vl * c
            for j in range(2, jmax + 1):
                cn = c * c1 - s * s1
                s = s * c1 + c * s1
                c = cn
                out[j] += vl * c
    for j in range(1, jmax + 1):
        out[j] *= root2
    return out_arr


def cosine_series(const double[::1] coeffs, const double[::1] x):
    cdef Py_ssize_t m = x.shape[0]
    cdef Py_ssize_t jmax = coeffs.shape[0] - 1
    cdef Py_ssize_t i, j
    cdef double c1, s1, c, s, cn, acc
    cdef double root2 = sqrt(2.0)
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(m):
            if jmax < 0:
                out[i] = 0.0
                continue
            acc = 0.0
            if jmax >= 1:
                c1 = cos(M_PI * x[i])
                s1 = sin(M_PI * x[i])
                c = c1
                s = s1
                acc = coeffs[1] * c
                for j in range(2, jmax + 1):
                    cn = c * c1 - s * s1
                    s = s * c1 + c * s1
                    c = cn
                    acc = acc + coeffs[j] * c
            out[i] = coeffs[0] + root2 * acc
    return out_arr
