# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled selection kernels. Same contract as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def select_p1(total, precision, limits):
    cdef const double[::1] tot = np.ascontiguousarray(total, dtype=np.float64)
    cdef const double[::1] pr = np.ascontiguousarray(precision, dtype=np.float64)
    cdef const double[::1] lim = np.ascontiguousarray(limits, dtype=np.float64)
    cdef Py_ssize_t n = tot.shape[0], t, i
    cdef long long best
    out = np.full(lim.shape[0], -1, dtype=np.int64)
    cdef long long[::1] res = out
    for t in range(lim.shape[0]):
        best = -1
        for i in range(n):
            if tot[i] <= lim[t]:
                if best < 0 or pr[i] > pr[best] or (pr[i] == pr[best] and tot[i] < tot[best]):
                    best = i
        res[t] = best
    return out


def select_p2(total, precision, floors):
    cdef const double[::1] tot = np.ascontiguousarray(total, dtype=np.float64)
    cdef const double[::1] pr = np.ascontiguousarray(precision, dtype=np.float64)
    cdef const double[::1] fl = np.ascontiguousarray(floors, dtype=np.float64)
    cdef Py_ssize_t n = tot.shape[0], t, i
    cdef long long best
    out = np.full(fl.shape[0], -1, dtype=np.int64)
    cdef long long[::1] res = out
    for t in range(fl.shape[0]):
        best = -1
        for i in range(n):
            if pr[i] >= fl[t]:
                if best < 0 or tot[i] < tot[best] or (tot[i] == tot[best] and pr[i] > pr[best]):
                    best = i
        res[t] = best
    return out
