"""Vectorised numpy implementations of the pixel kernels.

Used when the compiled ``_ckernels`` extension is unavailable or disabled via
``CAMFORGE_NO_EXT=1``. Results agree with the compiled kernels to rounding
(summation order differs), not bit-for-bit.
"""

import numpy as np
from scipy.signal import fftconvolve

NAME = "python"


def _catmull_rom(t):
    # weights for taps at offsets -1, 0, +1, +2 given fractional position t
    t2 = t * t
    t3 = t2 * t
    w0 = -0.5 * t3 + t2 - 0.5 * t
    w1 = 1.5 * t3 - 2.5 * t2 + 1.0
    w2 = -1.5 * t3 + 2.0 * t2 + 0.5 * t
    w3 = 0.5 * t3 - 0.5 * t2
    return (w0, w1, w2, w3)


def grid_sample_bicubic(img, grid):
    h, w, c = img.shape
    x = ((grid[..., 0] + 1.0) * w - 1.0) * 0.5
    y = ((grid[..., 1] + 1.0) * h - 1.0) * 0.5
    x0 = np.floor(x)
    y0 = np.floor(y)
    wx = _catmull_rom(x - x0)
    wy = _catmull_rom(y - y0)
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)
    out = np.zeros(grid.shape[:2] + (c,), dtype=np.float64)
    for j in range(4):
        yi = np.clip(y0 + (j - 1), 0, h - 1)
        row = np.zeros_like(out)
        for i in range(4):
            xi = np.clip(x0 + (i - 1), 0, w - 1)
            row += wx[i][..., None] * img[yi, xi]
        out += wy[j][..., None] * row
    return out


def _bilinear(img, x, y):
    h, w, _ = img.shape
    x = np.clip(x, 0.0, w - 1.0)
    y = np.clip(y, 0.0, h - 1.0)
    x0 = np.minimum(np.floor(x).astype(np.int64), w - 1)
    y0 = np.minimum(np.floor(y).astype(np.int64), h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (x - x0)[..., None]
    fy = (y - y0)[..., None]
    top = img[y0, x0] * (1.0 - fx) + img[y0, x1] * fx
    bot = img[y1, x0] * (1.0 - fx) + img[y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def flow_blur(img, flow, s, nsamples):
    h, w, _ = img.shape
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    acc = np.zeros_like(img)
    for i in range(nsamples):
        off = ((i + 0.5) / nsamples - 0.5) * s
        acc += _bilinear(img, xx + off * flow[..., 0], yy + off * flow[..., 1])
    return acc / nsamples


def bokeh_scatter(lin, radius):
    h, w, c = lin.shape
    r2 = radius * radius
    rmax = int(np.floor(radius.max())) if radius.size else 0
    offsets = [
        (dy, dx)
        for dy in range(-rmax, rmax + 1)
        for dx in range(-rmax, rmax + 1)
        if dy * dy + dx * dx <= rmax * rmax + 2 * rmax + 1
    ]
    count = np.zeros((h, w))
    for dy, dx in offsets:
        count += r2 >= dy * dy + dx * dx
    weight = 1.0 / count
    acc = np.zeros((h, w, c))
    wsum = np.zeros((h, w))
    for dy, dx in offsets:
        m = np.where(r2 >= dy * dy + dx * dx, weight, 0.0)
        # source rows/cols whose target (y+dy, x+dx) lands inside the frame
        sy0, sy1 = max(0, -dy), min(h, h - dy)
        sx0, sx1 = max(0, -dx), min(w, w - dx)
        if sy0 >= sy1 or sx0 >= sx1:
            continue
        ms = m[sy0:sy1, sx0:sx1]
        wsum[sy0 + dy:sy1 + dy, sx0 + dx:sx1 + dx] += ms
        acc[sy0 + dy:sy1 + dy, sx0 + dx:sx1 + dx] += ms[..., None] * lin[sy0:sy1, sx0:sx1]
    return acc, wsum


def correlate_clamped(img, kernel):
    kh, kw = kernel.shape
    ph, pw = kh // 2, kw // 2
    padded = np.pad(img, ((ph, ph), (pw, pw), (0, 0)), mode="edge")
    flipped = kernel[::-1, ::-1]
    out = np.empty_like(img)
    for ch in range(img.shape[2]):
        out[..., ch] = fftconvolve(padded[..., ch], flipped, mode="valid")
    return out
