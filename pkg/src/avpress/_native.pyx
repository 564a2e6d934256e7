# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel core; see avpress._purekernels for the reference surface."""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


cdef inline double _dot(const double[::1] u, const double[::1] v) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(u.shape[0]):
        acc += u[i] * v[i]
    return acc


cdef inline double _cos(const double[::1] u, const double[::1] v) noexcept nogil:
    cdef double nu = sqrt(_dot(u, u))
    cdef double nv = sqrt(_dot(v, v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return _dot(u, v) / (nu * nv)


def frame_mean(const double[:, :, ::1] tokens):
    """Mean token per frame: (T, P, d) -> (T, d)."""
    cdef Py_ssize_t T = tokens.shape[0]
    cdef Py_ssize_t P = tokens.shape[1]
    cdef Py_ssize_t d = tokens.shape[2]
    out_arr = np.zeros((T, d), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t t, p, k
    with nogil:
        for t in range(T):
            for p in range(P):
                for k in range(d):
                    out[t, k] += tokens[t, p, k]
            for k in range(d):
                out[t, k] /= P
    return out_arr


def cosine_rows(const double[:, ::1] mat, const double[::1] vec):
    """Cosine of each row of ``mat`` against ``vec``; zero-norm rows score 0."""
    cdef Py_ssize_t n = mat.shape[0]
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double vec_norm = sqrt(_dot(vec, vec))
    cdef double row_norm, dot
    cdef Py_ssize_t i
    if vec_norm == 0.0:
        return out_arr
    with nogil:
        for i in range(n):
            row_norm = sqrt(_dot(mat[i], mat[i]))
            if row_norm != 0.0:
                out[i] = _dot(mat[i], vec) / (row_norm * vec_norm)
    return out_arr


def weighted_rows_sum(const double[:, ::1] mat, const double[::1] weights):
    """Weighted sum of rows: (n, d), (n,) -> (d,)."""
    cdef Py_ssize_t n = mat.shape[0]
    cdef Py_ssize_t d = mat.shape[1]
    out_arr = np.zeros(d, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, k
    with nogil:
        for i in range(n):
            for k in range(d):
                out[k] += weights[i] * mat[i, k]
    return out_arr


def merge_into_anchors(const double[:, ::1] tokens,
                       const cnp.int64_t[::1] anchor_rows,
                       const cnp.int64_t[::1] assign):
    """Fold dropped tokens into their anchors by relu-cosine weighting."""
    cdef Py_ssize_t N = tokens.shape[0]
    cdef Py_ssize_t d = tokens.shape[1]
    cdef Py_ssize_t B = anchor_rows.shape[0]
    merged_arr = np.zeros((B, d), dtype=np.float64)
    denom_arr = np.ones(B, dtype=np.float64)
    cdef double[:, ::1] merged = merged_arr
    cdef double[::1] denom = denom_arr
    cdef Py_ssize_t i, j, k
    cdef double w
    with nogil:
        for j in range(B):
            for k in range(d):
                merged[j, k] = tokens[anchor_rows[j], k]
        for i in range(N):
            j = assign[i]
            if j < 0:
                continue
            w = _cos(tokens[i], tokens[anchor_rows[j]])
            if w <= 0.0:
                continue
            for k in range(d):
                merged[j, k] += w * tokens[i, k]
            denom[j] += w
        for j in range(B):
            for k in range(d):
                merged[j, k] /= denom[j]
    return merged_arr
