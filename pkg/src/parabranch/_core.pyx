# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled lane for the hot path kernels (see _pathops.py for the
reference numpy implementation and the operation contract)."""

from libc.math cimport exp

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"


def walk_levy(object dt_arr, object cont_inc, object jump_inc, double b, object rec_idx):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dts = np.ascontiguousarray(dt_arr, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cont = np.ascontiguousarray(cont_inc, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] jump = np.ascontiguousarray(jump_inc, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] rec = np.ascontiguousarray(rec_idx, dtype=np.int64)

    cdef Py_ssize_t n = dts.shape[0]
    cdef Py_ssize_t m = rec.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] l_rec = np.empty(m, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] i_rec = np.empty(m, dtype=np.float64)

    cdef double L = 0.0
    cdef double I = 0.0
    cdef double f0, f1, l_pre
    cdef Py_ssize_t i, j = 0

    with nogil:
        while j < m and rec[j] == 0:
            l_rec[j] = 0.0
            i_rec[j] = 0.0
            j += 1
        for i in range(n):
            f0 = exp(-b * L)
            l_pre = L + cont[i]
            f1 = exp(-b * l_pre)
            I += 0.5 * (f0 + f1) * dts[i]
            L = l_pre + jump[i]
            while j < m and rec[j] == i + 1:
                l_rec[j] = L
                i_rec[j] = I
                j += 1
    return l_rec, i_rec
