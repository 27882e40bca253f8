# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled series evaluation kernel (same contract as ``_pykernels``)."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def eval_batch(const int[:, ::1] mono, const double[::1] coef, const int[::1] lam_exp,
               const int[::1] psi_col, const int[::1] out_col,
               const double[:, ::1] points, const double[:, ::1] psi_vals, int n_out):
    cdef Py_ssize_t n_terms = mono.shape[0]
    cdef Py_ssize_t n_pts = points.shape[0]
    cdef Py_ssize_t p, t, j
    cdef int e, max_e = 0, min_l = 0, max_l = 0
    cdef double v
    out_arr = np.zeros((n_pts, n_out))
    cdef double[:, ::1] out = out_arr
    if n_terms == 0:
        return out_arr
    for t in range(n_terms):
        for j in range(13):
            if mono[t, j] > max_e:
                max_e = mono[t, j]
        if lam_exp[t] < min_l:
            min_l = lam_exp[t]
        if lam_exp[t] > max_l:
            max_l = lam_exp[t]
    pw_arr = np.empty((13, max_e + 1))
    lp_arr = np.empty(max_l - min_l + 1)
    cdef double[:, ::1] pw = pw_arr
    cdef double[::1] lp = lp_arr
    cdef double lam
    for p in range(n_pts):
        for j in range(13):
            pw[j, 0] = 1.0
            for e in range(1, max_e + 1):
                pw[j, e] = pw[j, e - 1] * points[p, j]
        lam = points[p, 13]
        for e in range(min_l, max_l + 1):
            lp[e - min_l] = lam ** e
        for t in range(n_terms):
            v = coef[t] * lp[lam_exp[t] - min_l]
            for j in range(13):
                e = mono[t, j]
                if e:
                    v *= pw[j, e]
            if psi_col[t] >= 0:
                v *= psi_vals[p, psi_col[t]]
            out[p, out_col[t]] += v
    return out_arr
