# cython: language_level=3
"""Compiled pixel kernels. All loops run without the GIL."""

import numpy as np
from libc.math cimport floor

NAME = "cython"


cdef inline Py_ssize_t _clampi(Py_ssize_t v, Py_ssize_t hi) noexcept nogil:
    if v < 0:
        return 0
    if v > hi:
        return hi
    return v


cdef inline void _cr_weights(double t, double* w) noexcept nogil:
    cdef double t2 = t * t
    cdef double t3 = t2 * t
    w[0] = -0.5 * t3 + t2 - 0.5 * t
    w[1] = 1.5 * t3 - 2.5 * t2 + 1.0
    w[2] = -1.5 * t3 + 2.0 * t2 + 0.5 * t
    w[3] = 0.5 * t3 - 0.5 * t2


def grid_sample_bicubic(const double[:, :, ::1] img, const double[:, :, ::1] grid):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1], nc = img.shape[2]
    cdef Py_ssize_t ho = grid.shape[0], wo = grid.shape[1]
    out_arr = np.zeros((ho, wo, nc), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t oy, ox, i, j, c, xi, yi, ix0, iy0
    cdef double x, y, fx, fy, wij
    cdef double wx[4]
    cdef double wy[4]
    with nogil:
        for oy in range(ho):
            for ox in range(wo):
                x = ((grid[oy, ox, 0] + 1.0) * w - 1.0) * 0.5
                y = ((grid[oy, ox, 1] + 1.0) * h - 1.0) * 0.5
                fx = floor(x)
                fy = floor(y)
                _cr_weights(x - fx, wx)
                _cr_weights(y - fy, wy)
                ix0 = <Py_ssize_t>fx
                iy0 = <Py_ssize_t>fy
                for j in range(4):
                    yi = _clampi(iy0 + j - 1, h - 1)
                    for i in range(4):
                        xi = _clampi(ix0 + i - 1, w - 1)
                        wij = wy[j] * wx[i]
                        for c in range(nc):
                            out[oy, ox, c] += wij * img[yi, xi, c]
    return out_arr


def flow_blur(const double[:, :, ::1] img, const double[:, :, ::1] flow, double s, int nsamples):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1], nc = img.shape[2]
    out_arr = np.zeros((h, w, nc), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t y, x, c, x0, y0, x1, y1
    cdef int i
    cdef double off, sx, sy, fx, fy, inv = 1.0 / nsamples
    with nogil:
        for y in range(h):
            for x in range(w):
                for i in range(nsamples):
                    off = ((i + 0.5) / nsamples - 0.5) * s
                    sx = x + off * flow[y, x, 0]
                    sy = y + off * flow[y, x, 1]
                    if sx < 0.0:
                        sx = 0.0
                    elif sx > w - 1.0:
                        sx = w - 1.0
                    if sy < 0.0:
                        sy = 0.0
                    elif sy > h - 1.0:
                        sy = h - 1.0
                    x0 = <Py_ssize_t>floor(sx)
                    y0 = <Py_ssize_t>floor(sy)
                    if x0 > w - 1:
                        x0 = w - 1
                    if y0 > h - 1:
                        y0 = h - 1
                    x1 = x0 + 1 if x0 + 1 < w else w - 1
                    y1 = y0 + 1 if y0 + 1 < h else h - 1
                    fx = sx - x0
                    fy = sy - y0
                    for c in range(nc):
                        out[y, x, c] += (
                            (img[y0, x0, c] * (1.0 - fx) + img[y0, x1, c] * fx) * (1.0 - fy)
                            + (img[y1, x0, c] * (1.0 - fx) + img[y1, x1, c] * fx) * fy
                        )
                for c in range(nc):
                    out[y, x, c] *= inv
    return out_arr


def bokeh_scatter(const double[:, :, ::1] lin, const double[:, ::1] radius):
    """Row-major scatter of each source pixel over its disk; fixed order."""
    cdef Py_ssize_t h = lin.shape[0], w = lin.shape[1], nc = lin.shape[2]
    acc_arr = np.zeros((h, w, nc), dtype=np.float64)
    wsum_arr = np.zeros((h, w), dtype=np.float64)
    cdef double[:, :, ::1] acc = acc_arr
    cdef double[:, ::1] wsum = wsum_arr
    cdef Py_ssize_t y, x, dy, dx, ty, tx, c, rmax
    cdef double r, r2, wt
    cdef long n
    with nogil:
        for y in range(h):
            for x in range(w):
                r = radius[y, x]
                r2 = r * r
                rmax = <Py_ssize_t>floor(r)
                n = 0
                for dy in range(-rmax, rmax + 1):
                    for dx in range(-rmax, rmax + 1):
                        if <double>(dy * dy + dx * dx) <= r2:
                            n += 1
                wt = 1.0 / n
                for dy in range(-rmax, rmax + 1):
                    ty = y + dy
                    if ty < 0 or ty >= h:
                        continue
                    for dx in range(-rmax, rmax + 1):
                        tx = x + dx
                        if tx < 0 or tx >= w:
                            continue
                        if <double>(dy * dy + dx * dx) <= r2:
                            wsum[ty, tx] += wt
                            for c in range(nc):
                                acc[ty, tx, c] += wt * lin[y, x, c]
    return acc_arr, wsum_arr

