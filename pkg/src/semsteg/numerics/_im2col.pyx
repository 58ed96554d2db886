# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled im2col / col2im kernels.

Loop order matches the numpy fallback so that col2im accumulates every
output pixel in the same (ki, kj) order and both backends agree bit for bit.
"""
import numpy as np


def im2col(const double[:, :, :, ::1] xp, int k, int stride, int out_h, int out_w):
    cdef Py_ssize_t n = xp.shape[0], c = xp.shape[1]
    out = np.empty((n, c, k, k, out_h, out_w), dtype=np.float64)
    cdef double[:, :, :, :, :, ::1] o = out
    cdef Py_ssize_t b, ch, ki, kj, i, j, r
    with nogil:
        for b in range(n):
            for ch in range(c):
                for ki in range(k):
                    for kj in range(k):
                        for i in range(out_h):
                            r = ki + i * stride
                            for j in range(out_w):
                                o[b, ch, ki, kj, i, j] = xp[b, ch, r, kj + j * stride]
    return out


def col2im(const double[:, :, :, :, :, ::1] cols, int hp, int wp, int stride):
    cdef Py_ssize_t n = cols.shape[0], c = cols.shape[1], k = cols.shape[2]
    cdef Py_ssize_t out_h = cols.shape[4], out_w = cols.shape[5]
    out = np.zeros((n, c, hp, wp), dtype=np.float64)
    cdef double[:, :, :, ::1] o = out
    cdef Py_ssize_t b, ch, ki, kj, i, j, r
    with nogil:
        for b in range(n):
            for ch in range(c):
                for ki in range(k):
                    for kj in range(k):
                        for i in range(out_h):
                            r = ki + i * stride
                            for j in range(out_w):
                                o[b, ch, r, kj + j * stride] += cols[b, ch, ki, kj, i, j]
    return out
