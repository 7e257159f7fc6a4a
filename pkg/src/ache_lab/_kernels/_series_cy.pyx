# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for truncated power-series arithmetic.

These are the hot inner loops of the library: every curvature entry is a sum
of truncated Cauchy products, so the whole pipeline bottoms out in `conv`.
The NumPy fallback in `_series_py` implements the identical contracts.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def conv(cnp.complex128_t[::1] a, cnp.complex128_t[::1] b, Py_ssize_t nout):
    """Truncated Cauchy product: out[k] = sum_{i+j=k} a[i]*b[j], k < nout."""
    cdef Py_ssize_t na = a.shape[0]
    cdef Py_ssize_t nb = b.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.zeros(nout, dtype=np.complex128)
    cdef cnp.complex128_t[::1] o = out
    cdef Py_ssize_t i, j, jmax
    cdef cnp.complex128_t ai
    for i in range(min(na, nout)):
        ai = a[i]
        if ai == 0:
            continue
        jmax = nout - i
        if jmax > nb:
            jmax = nb
        for j in range(jmax):
            o[i + j] = o[i + j] + ai * b[j]
    return out


def inv_unit(cnp.complex128_t[::1] f, Py_ssize_t nout):
    """Multiplicative inverse of a series with f[0] != 0, to nout terms."""
    cdef Py_ssize_t nf = f.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.zeros(nout, dtype=np.complex128)
    cdef cnp.complex128_t[::1] o = out
    cdef cnp.complex128_t f0 = f[0]
    cdef cnp.complex128_t acc
    cdef Py_ssize_t n, j
    o[0] = 1.0 / f0
    for n in range(1, nout):
        acc = 0
        for j in range(1, min(n + 1, nf)):
            acc = acc + f[j] * o[n - j]
        o[n] = -acc / f0
    return out


def sqrt_unit(cnp.complex128_t[::1] f, Py_ssize_t nout):
    """Square root of a series with f[0] != 0 (principal branch on f[0])."""
    cdef Py_ssize_t nf = f.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.zeros(nout, dtype=np.complex128)
    cdef cnp.complex128_t[::1] o = out
    cdef cnp.complex128_t s0 = np.sqrt(complex(f[0]))
    cdef cnp.complex128_t acc, fn
    cdef Py_ssize_t n, j
    o[0] = s0
    for n in range(1, nout):
        fn = f[n] if n < nf else 0
        acc = 0
        for j in range(1, n):
            acc = acc + o[j] * o[n - j]
        o[n] = (fn - acc) / (2 * s0)
    return out
