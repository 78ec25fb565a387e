# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for truncated Taylor-jet convolution.

The multiplication table (ia, ib, ic) enumerates every coefficient pair
whose multi-indices sum to a retained multi-index; it is sorted by the
output index ic and both kernels accumulate in table order, so results
match the numpy reduceat fallback up to compiler FMA contraction (about
one ulp).  Each backend is deterministic run-to-run on its own.
"""

import numpy as np


def conv_pairs(const double[:, ::1] a, const double[:, ::1] b,
               const Py_ssize_t[::1] ia, const Py_ssize_t[::1] ib, const Py_ssize_t[::1] ic,
               Py_ssize_t ncoeff):
    """Batched jet product: (B, N) x (B, N) -> (B, N)."""
    cdef Py_ssize_t nbatch = a.shape[0]
    cdef Py_ssize_t nterms = ia.shape[0]
    out_arr = np.zeros((nbatch, ncoeff))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, t
    for r in range(nbatch):
        for t in range(nterms):
            out[r, ic[t]] += a[r, ia[t]] * b[r, ib[t]]
    return out_arr


def conv_matmul(const double[:, :, ::1] a, const double[:, :, ::1] b,
                const Py_ssize_t[::1] ia, const Py_ssize_t[::1] ib, const Py_ssize_t[::1] ic,
                Py_ssize_t ncoeff):
    """Jet-entry matrix product: (p, q, N) x (q, r, N) -> (p, r, N).

    The inner-index sum runs innermost per table entry, matching the
    einsum-then-reduceat evaluation order of the fallback.
    """
    cdef Py_ssize_t np_ = a.shape[0]
    cdef Py_ssize_t nq = a.shape[1]
    cdef Py_ssize_t nr = b.shape[1]
    cdef Py_ssize_t nterms = ia.shape[0]
    out_arr = np.zeros((np_, nr, ncoeff))
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t i, j, k, t
    cdef double acc
    for i in range(np_):
        for j in range(nr):
            for t in range(nterms):
                acc = 0.0
                for k in range(nq):
                    acc += a[i, k, ia[t]] * b[k, j, ib[t]]
                out[i, j, ic[t]] += acc
    return out_arr
