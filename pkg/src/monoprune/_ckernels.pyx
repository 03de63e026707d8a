# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled Boolean matrix kernels (rows packed into uint64 words).

Dimensions above 64 are delegated to the pure-Python kernels.
"""

from libc.stdint cimport uint64_t

from monoprune import _pykernels

BACKEND = "cython"

ones_row = _pykernels.ones_row

cdef int MAXDIM = 64


cdef inline int _load(tuple a, uint64_t* out) except -1:
    cdef Py_ssize_t i, n = len(a)
    for i in range(n):
        out[i] = <uint64_t>a[i]
    return 0


cdef inline tuple _store(uint64_t* rows, Py_ssize_t n):
    return tuple([rows[i] for i in range(n)])


def mat_or(tuple a, tuple b):
    cdef Py_ssize_t n = len(a)
    if n > MAXDIM:
        return _pykernels.mat_or(a, b)
    cdef uint64_t ra[64]
    cdef uint64_t rb[64]
    cdef Py_ssize_t i
    _load(a, ra)
    _load(b, rb)
    for i in range(n):
        ra[i] |= rb[i]
    return _store(ra, n)


def mat_and(tuple a, tuple b):
    cdef Py_ssize_t n = len(a)
    if n > MAXDIM:
        return _pykernels.mat_and(a, b)
    cdef uint64_t ra[64]
    cdef uint64_t rb[64]
    cdef Py_ssize_t i
    _load(a, ra)
    _load(b, rb)
    for i in range(n):
        ra[i] &= rb[i]
    return _store(ra, n)


def mat_mul(tuple a, tuple b):
    cdef Py_ssize_t n = len(a)
    if n > MAXDIM:
        return _pykernels.mat_mul(a, b)
    cdef uint64_t ra[64]
    cdef uint64_t rb[64]
    cdef uint64_t out[64]
    cdef uint64_t r, acc
    cdef Py_ssize_t i, k
    _load(a, ra)
    _load(b, rb)
    for i in range(n):
        r = ra[i]
        acc = 0
        k = 0
        while r:
            if r & 1:
                acc |= rb[k]
            r >>= 1
            k += 1
        out[i] = acc
    return _store(out, n)


def mat_closure(tuple a):
    cdef Py_ssize_t n = len(a)
    if n > MAXDIM:
        return _pykernels.mat_closure(a)
    cdef uint64_t rows[64]
    cdef Py_ssize_t i, k
    cdef uint64_t bit
    _load(a, rows)
    for k in range(n):
        bit = (<uint64_t>1) << k
        for i in range(n):
            if rows[i] & bit:
                rows[i] |= rows[k]
    for i in range(n):
        rows[i] |= (<uint64_t>1) << i
    return _store(rows, n)


def mat_complement(tuple a):
    cdef Py_ssize_t n = len(a)
    if n > MAXDIM:
        return _pykernels.mat_complement(a)
    cdef uint64_t rows[64]
    cdef uint64_t full
    cdef Py_ssize_t i
    _load(a, rows)
    full = (~(<uint64_t>0)) if n == 64 else (((<uint64_t>1) << n) - 1)
    for i in range(n):
        rows[i] = (full ^ (((<uint64_t>1) << i) - 1)) & ~rows[i]
    return _store(rows, n)


def mat_leq(tuple a, tuple b):
    cdef Py_ssize_t n = len(a)
    if n > MAXDIM:
        return _pykernels.mat_leq(a, b)
    cdef uint64_t ra[64]
    cdef uint64_t rb[64]
    cdef Py_ssize_t i
    _load(a, ra)
    _load(b, rb)
    for i in range(n):
        if ra[i] & ~rb[i]:
            return False
    return True
