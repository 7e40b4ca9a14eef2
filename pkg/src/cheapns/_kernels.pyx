# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled direct-convolution kernels.

Every output bin is accumulated by one thread in a fixed order, so results
are bitwise identical for any ``nthreads``.  Dot products use eight chains
keyed by the absolute frequency index of each term; enlarging the grid only
inserts terms into those chains, and because rounding is monotone no
retained output can decrease.
"""
import numpy as np

from cython.parallel cimport prange

DEF PAD = 8


cdef inline Py_ssize_t _imax(Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    return a if a > b else b


cdef inline Py_ssize_t _imin(Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    return a if a < b else b


cdef (Py_ssize_t, Py_ssize_t) _span(const double[::1] x) noexcept nogil:
    cdef Py_ssize_t n = x.shape[0], lo = 0, hi = n - 1
    while lo < n and x[lo] == 0.0:
        lo += 1
    while hi >= lo and x[hi] == 0.0:
        hi -= 1
    return lo, hi


cdef inline double _dot(const double* a, const double* b, Py_ssize_t n) noexcept nogil:
    # a[0] must sit at a frequency index divisible by 8; chain c takes index c mod 8
    cdef double s[8]
    cdef Py_ssize_t q, c, m = n // 8
    for c in range(8):
        s[c] = 0.0
    for q in range(m):
        for c in range(8):
            s[c] = s[c] + a[8 * q + c] * b[8 * q + c]
    q = 8 * m
    for c in range(n - q):
        s[c] = s[c] + a[q + c] * b[q + c]
    return ((s[0] + s[1]) + (s[2] + s[3])) + ((s[4] + s[5]) + (s[6] + s[7]))


cdef inline Py_ssize_t _align(Py_ssize_t lo, Py_ssize_t m) noexcept nogil:
    # largest i <= lo with (i - m) divisible by 8
    return lo - ((lo - m) % 8 + 8) % 8


def _padded(x):
    out = np.zeros(x.shape[0] + 2 * PAD)
    out[PAD:PAD + x.shape[0]] = x
    return out


def conv1d(const double[::1] f, const double[::1] g, int nthreads=1):
    """Central ``len(f)`` bins of the linear convolution of ``f`` and ``g``."""
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t m = (n - 1) // 2
    cdef Py_ssize_t flo, fhi, glo, ghi, j, s, lo, hi, i0
    out = np.zeros(n)
    cdef double[::1] o = out
    flo, fhi = _span(f)
    glo, ghi = _span(g)
    if fhi < flo or ghi < glo:
        return out
    # zero padding makes the aligned lead-in terms exact zeros
    fp_arr = _padded(np.asarray(f))
    gr_arr = _padded(np.asarray(g)[::-1])
    cdef const double[::1] fp = fp_arr
    cdef const double[::1] grp = gr_arr
    # g[s - i] == grp[PAD + n - 1 - s + i]
    for j in prange(n, nogil=True, schedule="static", num_threads=nthreads):
        s = j + m
        lo = _imax(flo, s - ghi)
        hi = _imin(fhi, s - glo)
        if hi >= lo:
            i0 = _align(lo, m)
            o[j] = _dot(&fp[PAD + i0], &grp[PAD + n - 1 - s + i0], hi - i0 + 1)
    return out


def autoconv1d(const double[::1] f, int nthreads=1):
    """``conv1d(f, f)`` summing each symmetric product pair once."""
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t m = (n - 1) // 2
    cdef Py_ssize_t flo, fhi, j, s, lo, hi, top, i0
    cdef double acc
    out = np.zeros(n)
    cdef double[::1] o = out
    flo, fhi = _span(f)
    if fhi < flo:
        return out
    fp_arr = _padded(np.asarray(f))
    fr_arr = _padded(np.asarray(f)[::-1])
    cdef const double[::1] fp = fp_arr
    cdef const double[::1] frp = fr_arr
    for j in prange(n, nogil=True, schedule="static", num_threads=nthreads):
        s = j + m
        lo = _imax(flo, s - fhi)
        hi = _imin(fhi, s - flo)
        if hi >= lo:
            # pairs (i, s - i) with i < s - i
            # (s - 1) // 2 truncates toward zero under cdivision, so s == 0 is special
            top = _imin(hi, (s - 1) // 2) if s > 0 else -1
            acc = 0.0
            if top >= lo:
                i0 = _align(lo, m)
                acc = 2.0 * _dot(&fp[PAD + i0], &frp[PAD + n - 1 - s + i0], top - i0 + 1)
            if s % 2 == 0 and lo <= s // 2 and s // 2 <= hi:
                acc = acc + f[s // 2] * f[s // 2]
            o[j] = acc
    return out


def conv2d(const double[:, ::1] f, const double[:, ::1] g, int nthreads=1):
    """Central ``f.shape`` bins of the 2-D linear convolution."""
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t m = (n - 1) // 2
    cdef Py_ssize_t j1, j2, i1, i2, s1, s2, lo1, hi1, lo2, hi2
    cdef double acc
    out = np.zeros((n, n))
    cdef double[:, ::1] o = out
    for j1 in prange(n, nogil=True, schedule="static", num_threads=nthreads):
        s1 = j1 + m
        lo1 = _imax(0, s1 - n + 1)
        hi1 = _imin(n - 1, s1)
        for j2 in range(n):
            s2 = j2 + m
            lo2 = _imax(0, s2 - n + 1)
            hi2 = _imin(n - 1, s2)
            acc = 0.0
            i1 = lo1
            while i1 <= hi1:
                i2 = lo2
                while i2 <= hi2:
                    acc = acc + f[i1, i2] * g[s1 - i1, s2 - i2]
                    i2 = i2 + 1
                i1 = i1 + 1
            o[j1, j2] = acc
    return out
