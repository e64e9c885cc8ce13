# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled CTC forward recursion over the blank-extended target sequence."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, INFINITY

cnp.import_array()


cdef inline double logaddexp2_(double a, double b) nogil:
    if a == -INFINITY:
        return b
    if b == -INFINITY:
        return a
    if a > b:
        return a + log(1.0 + exp(b - a))
    return b + log(1.0 + exp(a - b))


def forward_log_likelihood(cnp.ndarray[cnp.float64_t, ndim=2] log_probs,
                           cnp.ndarray[cnp.int64_t, ndim=1] extended):
    cdef Py_ssize_t T = log_probs.shape[0]
    cdef Py_ssize_t S = extended.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] alpha = np.full(S, -INFINITY)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] prev = np.empty(S)
    cdef Py_ssize_t t, s
    cdef double acc

    alpha[0] = log_probs[0, extended[0]]
    if S > 1:
        alpha[1] = log_probs[0, extended[1]]
    for t in range(1, T):
        prev[:] = alpha
        for s in range(S - 1, -1, -1):
            acc = prev[s]
            if s >= 1:
                acc = logaddexp2_(acc, prev[s - 1])
            if s >= 2 and extended[s] != 0 and extended[s] != extended[s - 2]:
                acc = logaddexp2_(acc, prev[s - 2])
            alpha[s] = acc + log_probs[t, extended[s]]
    if S == 1:
        return float(alpha[0])
    return float(logaddexp2_(alpha[S - 1], alpha[S - 2]))
