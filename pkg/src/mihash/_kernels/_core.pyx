# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the fallback kernels.

Semantics contract: bit-identical results to _fallback.py.  pair_counts and
hamming_many are exact integer computations; mi_grad_gather reproduces the
fallback's ascending-j accumulation order so the float64 sums match exactly.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def pair_counts(const unsigned char[:, ::1] u):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t k = u.shape[1]
    c1_arr = np.zeros(k, dtype=np.int64)
    c11_arr = np.zeros((k, k), dtype=np.int64)
    cdef long long[::1] c1 = c1_arr
    cdef long long[:, ::1] c11 = c11_arr
    cdef Py_ssize_t s, i, j
    for s in range(n):
        for i in range(k):
            if u[s, i]:
                c1[i] += 1
                for j in range(k):
                    if u[s, j]:
                        c11[i, j] += 1
    return c1_arr, c11_arr


def mi_grad_gather(const unsigned char[:, ::1] u, const double[:, :, ::1] coef):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t k = u.shape[1]
    grad_arr = np.zeros((n, k), dtype=np.float64)
    cdef double[:, ::1] grad = grad_arr
    cdef Py_ssize_t s, i, j
    cdef Py_ssize_t base
    cdef double acc
    for s in range(n):
        for i in range(k):
            base = 2 * (1 - <Py_ssize_t> u[s, i])
            acc = 0.0
            for j in range(k):
                # coef[i, i, :] is zero, so including j == i adds +0.0 and
                # keeps the op sequence aligned with the fallback
                acc += coef[i, j, base + (1 - <Py_ssize_t> u[s, j])]
            grad[s, i] = acc
    return grad_arr


def hamming_many(const unsigned long long[:, ::1] db, const unsigned long long[::1] q):
    cdef Py_ssize_t n = db.shape[0]
    cdef Py_ssize_t w = db.shape[1]
    out_arr = np.zeros(n, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef Py_ssize_t s, t
    cdef unsigned long long x
    cdef long long c
    for s in range(n):
        c = 0
        for t in range(w):
            x = db[s, t] ^ q[t]
            x = x - ((x >> 1) & 0x5555555555555555ULL)
            x = (x & 0x3333333333333333ULL) + ((x >> 2) & 0x3333333333333333ULL)
            x = (x + (x >> 4)) & 0x0F0F0F0F0F0F0F0FULL
            c += <long long> ((x * 0x0101010101010101ULL) >> 56)
        out[s] = c
    return out_arr
