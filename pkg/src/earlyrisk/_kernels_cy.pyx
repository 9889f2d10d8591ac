# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled lexical-diversity kernels; see _kernels_py.py for the contract."""

import numpy as np

cimport numpy as cnp

BACKEND = "compiled"


def msttr_sum(const cnp.int64_t[::1] codes, Py_ssize_t n_vocab, Py_ssize_t segment_len):
    cdef Py_ssize_t n = codes.shape[0]
    cdef Py_ssize_t n_segments = n // segment_len
    cdef cnp.int64_t[::1] stamp = np.full(n_vocab, -1, dtype=np.int64)
    cdef double total = 0.0
    cdef Py_ssize_t s, i, distinct
    cdef cnp.int64_t c
    for s in range(n_segments):
        distinct = 0
        for i in range(s * segment_len, (s + 1) * segment_len):
            c = codes[i]
            if stamp[c] != s:
                stamp[c] = s
                distinct += 1
        total += <double> distinct / <double> segment_len
    return total, n_segments


def mattr_mean(const cnp.int64_t[::1] codes, Py_ssize_t n_vocab, Py_ssize_t window_len):
    cdef Py_ssize_t n = codes.shape[0]
    cdef cnp.int64_t[::1] counts = np.zeros(n_vocab, dtype=np.int64)
    cdef Py_ssize_t distinct = 0
    cdef cnp.int64_t distinct_total = 0
    cdef Py_ssize_t i, right
    cdef cnp.int64_t c_in, c_out
    for i in range(window_len):
        c_in = codes[i]
        counts[c_in] += 1
        if counts[c_in] == 1:
            distinct += 1
    distinct_total = distinct
    for right in range(window_len, n):
        c_in = codes[right]
        counts[c_in] += 1
        if counts[c_in] == 1:
            distinct += 1
        c_out = codes[right - window_len]
        counts[c_out] -= 1
        if counts[c_out] == 0:
            distinct -= 1
        distinct_total += distinct
    cdef Py_ssize_t n_windows = n - window_len + 1
    return <double> distinct_total / (<double> n_windows * <double> window_len)


def mtld_factors(const cnp.int64_t[::1] codes, Py_ssize_t n_vocab, double threshold):
    cdef Py_ssize_t n = codes.shape[0]
    cdef cnp.int64_t[::1] stamp = np.full(n_vocab, -1, dtype=np.int64)
    cdef cnp.int64_t generation = 0
    cdef double factors = 0.0
    cdef double ttr = 1.0
    cdef Py_ssize_t distinct = 0
    cdef Py_ssize_t length = 0
    cdef Py_ssize_t i
    cdef cnp.int64_t c
    for i in range(n):
        c = codes[i]
        length += 1
        if stamp[c] != generation:
            stamp[c] = generation
            distinct += 1
        ttr = <double> distinct / <double> length
        if ttr < threshold:
            factors += 1.0
            generation += 1
            distinct = 0
            length = 0
    if length > 0:
        factors += (1.0 - ttr) / (1.0 - threshold)
    return factors
