# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of parman._kernels.reference; same contracts, C loops."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def cauchy_product(const double[::1] a, const double[::1] b):
    cdef Py_ssize_t n = a.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n)
    cdef double[::1] c = out
    cdef Py_ssize_t k, j
    cdef double acc
    for k in range(n):
        acc = 0.0
        for j in range(k + 1):
            acc += a[j] * b[k - j]
        c[k] = acc
    return out


def sin_cos_coeffs(const double[::1] a, double s0, double c0):
    cdef Py_ssize_t n = a.shape[0] - 1
    cdef cnp.ndarray[double, ndim=1] S_arr = np.empty(n + 1)
    cdef cnp.ndarray[double, ndim=1] C_arr = np.empty(n + 1)
    cdef double[::1] S = S_arr
    cdef double[::1] C = C_arr
    cdef Py_ssize_t k, j
    cdef double acc_s, acc_c, q
    S[0] = s0
    C[0] = c0
    for k in range(n):
        acc_s = 0.0
        acc_c = 0.0
        for j in range(k + 1):
            q = (j + 1) * a[j + 1]
            acc_s += C[k - j] * q
            acc_c += S[k - j] * q
        S[k + 1] = acc_s / (k + 1)
        C[k + 1] = -acc_c / (k + 1)
    return S_arr, C_arr


def sin_cos_step(const double[::1] a_ext, const double[::1] S, const double[::1] C):
    cdef Py_ssize_t n = S.shape[0] - 1
    cdef Py_ssize_t j
    cdef double acc_s = 0.0, acc_c = 0.0, q
    for j in range(n + 1):
        q = (j + 1) * a_ext[j + 1]
        acc_s += C[n - j] * q
        acc_c += S[n - j] * q
    return acc_s / (n + 1), -acc_c / (n + 1)


def reciprocal_coeffs(const double[::1] a):
    cdef Py_ssize_t n = a.shape[0] - 1
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n + 1)
    cdef double[::1] b = out
    cdef Py_ssize_t k, j
    cdef double acc
    b[0] = 1.0 / a[0]
    for k in range(1, n + 1):
        acc = 0.0
        for j in range(1, k + 1):
            acc += a[j] * b[k - j]
        b[k] = -b[0] * acc
    return out
