# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the fallback kernels.

Outputs are bit-identical to ``fallback``: the per-element operation order
matches, the build disables FP contraction, and the inverse normal CDF is
the same cephes routine scipy's ufunc wraps.  Keep both files in sync.
"""

from libc.math cimport sqrt
from libc.stdint cimport uint64_t

import numpy as np

from scipy.special.cython_special cimport ndtri


cdef uint64_t _GAMMA = 0x9E3779B97F4A7C15ULL
cdef uint64_t _MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t _MIX2 = 0x94D049BB133111EBULL

cdef double _U53_SCALE = 2.0 ** -53


cdef inline uint64_t _mix64(uint64_t x) noexcept nogil:
    x ^= x >> 30
    x *= _MIX1
    x ^= x >> 27
    x *= _MIX2
    x ^= x >> 31
    return x


def normal_fill(key, start, count):
    """Standard normal draws for flat indices start .. start+count-1."""
    cdef uint64_t k = <uint64_t> key
    cdef uint64_t st = <uint64_t> start
    cdef Py_ssize_t n = count
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    cdef uint64_t s
    for i in range(n):
        s = _mix64(k + (st + <uint64_t> i + 1ULL) * _GAMMA)
        ov[i] = ndtri((<double> (s >> 11) + 0.5) * _U53_SCALE)
    return out


def blend(fg, bg, mask):
    """fg*mask + bg*(1-mask); mask (F,1,H,W) broadcasts over channels."""
    fa = np.ascontiguousarray(fg, dtype=np.float64)
    ba = np.ascontiguousarray(bg, dtype=np.float64)
    ma = np.ascontiguousarray(mask, dtype=np.float64)
    out = np.empty_like(fa)
    cdef double[:, :, :, ::1] f = fa
    cdef double[:, :, :, ::1] b = ba
    cdef double[:, :, :, ::1] m = ma
    cdef double[:, :, :, ::1] o = out
    cdef Py_ssize_t F = f.shape[0], C = f.shape[1], H = f.shape[2], W = f.shape[3]
    cdef Py_ssize_t fi, c, h, w
    cdef double mv
    for fi in range(F):
        for c in range(C):
            for h in range(H):
                for w in range(W):
                    mv = m[fi, 0, h, w]
                    o[fi, c, h, w] = f[fi, c, h, w] * mv + b[fi, c, h, w] * (1.0 - mv)
    return out


def lincomb(double a, x, double b, y):
    """a*x + b*y elementwise."""
    xa = np.ascontiguousarray(x, dtype=np.float64)
    ya = np.ascontiguousarray(y, dtype=np.float64)
    out = np.empty_like(xa)
    cdef double[::1] xv = xa.ravel()
    cdef double[::1] yv = ya.ravel()
    cdef double[::1] ov = out.ravel()
    cdef Py_ssize_t i, n = xv.shape[0]
    for i in range(n):
        ov[i] = a * xv[i] + b * yv[i]
    return out


def retime(x, eps, double abar_from, double abar_to):
    """Move a latent between noise levels along a fixed noise direction."""
    xa = np.ascontiguousarray(x, dtype=np.float64)
    ea = np.ascontiguousarray(eps, dtype=np.float64)
    out = np.empty_like(xa)
    cdef double sf = sqrt(abar_from)
    cdef double st = sqrt(abar_to)
    cdef double bf = sqrt(1.0 - abar_from)
    cdef double bt = sqrt(1.0 - abar_to)
    cdef double[::1] xv = xa.ravel()
    cdef double[::1] ev = ea.ravel()
    cdef double[::1] ov = out.ravel()
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef double x0
    for i in range(n):
        x0 = (xv[i] - bf * ev[i]) / sf
        ov[i] = st * x0 + bt * ev[i]
    return out


def dilate(mask, int k):
    """Binary dilation by a k x k window per frame, zero padded at borders."""
    ma = np.ascontiguousarray(mask, dtype=np.float64)
    out = np.empty_like(ma)
    cdef double[:, :, :, ::1] m = ma
    cdef double[:, :, :, ::1] o = out
    cdef Py_ssize_t F = m.shape[0], H = m.shape[2], W = m.shape[3]
    cdef Py_ssize_t r = k // 2
    cdef Py_ssize_t fi, h, w, dy, dx, y0, y1, x0, x1
    cdef double best
    for fi in range(F):
        for h in range(H):
            y0 = h - r
            if y0 < 0:
                y0 = 0
            y1 = h + r + 1
            if y1 > H:
                y1 = H
            for w in range(W):
                x0 = w - r
                if x0 < 0:
                    x0 = 0
                x1 = w + r + 1
                if x1 > W:
                    x1 = W
                best = 0.0
                for dy in range(y0, y1):
                    for dx in range(x0, x1):
                        if m[fi, 0, dy, dx] > best:
                            best = m[fi, 0, dy, dx]
                    if best == 1.0:
                        break
                o[fi, 0, h, w] = best
    return out
