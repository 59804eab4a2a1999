"""Image metrics, windowed embedding similarity and effect-fidelity proxies."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import InvalidArgument, UndefinedCorrelation, UnsupportedEffect
from .trajectory import EffectKind

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])
EPS = 1e-6
EDGE_THRESHOLD = 0.1
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def luma(frame):
    return np.asarray(frame, dtype=np.float64) @ LUMA_WEIGHTS


def psnr(a, b):
    """Peak signal-to-noise ratio in dB for [0, 1] frames; ``inf`` when identical."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidArgument(f"shape mismatch: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def gaussian_window(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def ssim_map(a, b):
    """Local SSIM on luma over every fully-contained 11x11 Gaussian window."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidArgument(f"shape mismatch: {a.shape} vs {b.shape}")
    if min(a.shape[:2]) < SSIM_WINDOW:
        raise InvalidArgument(f"SSIM needs frames at least {SSIM_WINDOW}px on each side, got {a.shape[:2]}")
    ya = luma(a) if a.ndim == 3 else a
    yb = luma(b) if b.ndim == 3 else b
    g = gaussian_window()

    def blur(img):
        # separable filter, then keep only windows fully inside the frame
        out = ndimage.correlate1d(img, g, axis=0, mode="constant")
        out = ndimage.correlate1d(out, g, axis=1, mode="constant")
        r = SSIM_WINDOW // 2
        return out[r:img.shape[0] - r, r:img.shape[1] - r]

    mu_a, mu_b = blur(ya), blur(yb)
    var_a = blur(ya * ya) - mu_a ** 2
    var_b = blur(yb * yb) - mu_b ** 2
    cov = blur(ya * yb) - mu_a * mu_b
    c1 = (SSIM_K1 * 1.0) ** 2
    c2 = (SSIM_K2 * 1.0) ** 2
    return ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / ((mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2))


def ssim(a, b):
    return float(np.mean(ssim_map(a, b)))


@dataclass
class WClipResult:
    value: float
    per_frame: list
    window: int
    excluded: int = 0
    excluded_frames: list = field(default_factory=list)


def window_half_width(window):
    """Offsets searched on each side: wCLIP-1 -> 0, wCLIP-5 -> 2, wCLIP-10 -> 5."""
    if int(window) != window or window < 1:
        raise InvalidArgument(f"window must be a positive integer, got {window!r}")
    return int(window) // 2


def wclip_report(gen, ref, window=5):
    gen = np.asarray(gen, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if gen.ndim != 2 or gen.shape != ref.shape:
        raise InvalidArgument(f"embedding sequences must be equal-size T x d, got {gen.shape} and {ref.shape}")
    half = window_half_width(window)
    t = gen.shape[0]
    # exactly rounded dot products: identical vectors give a cosine of exactly 1
    gsq = [math.fsum(v * v) for v in gen]
    rsq = [math.fsum(v * v) for v in ref]
    per_frame = []
    excluded = 0
    excluded_frames = []
    for i in range(t):
        best = None
        if gsq[i] > 0:
            for k in range(-half, half + 1):
                j = i + k
                if j < 0 or j >= t:
                    continue
                if rsq[j] == 0:
                    excluded += 1
                    continue
                c = math.fsum(gen[i] * ref[j]) / math.sqrt(gsq[i] * rsq[j])
                best = c if best is None else max(best, c)
        else:
            excluded += 1
        if best is None:
            excluded_frames.append(i)
            per_frame.append(None)
        else:
            per_frame.append(min(best, 1.0))
    valid = [v for v in per_frame if v is not None]
    value = math.fsum(valid) / len(valid) if valid else math.nan
    return WClipResult(value, per_frame, int(window), excluded, excluded_frames)


def wclip(gen, ref, window=5):
    """Mean over frames of the best cosine similarity within a temporal window."""
    rep = wclip_report(gen, ref, window)
    if rep.excluded:
        warnings.warn(f"wclip ignored {rep.excluded} zero-norm comparisons", RuntimeWarning, stacklevel=2)
    return rep.value


def edge_density(frame, threshold=EDGE_THRESHOLD):
    y = luma(frame)
    # raw Sobel operator output (a unit step responds with 4)
    gx = ndimage.sobel(y, axis=1, mode="nearest")
    gy = ndimage.sobel(y, axis=0, mode="nearest")
    return float(np.mean(np.hypot(gx, gy) > threshold))


def inverse_laplacian_variance(frame):
    lap = ndimage.laplace(luma(frame), mode="nearest")
    return 1.0 / (float(lap.var()) + EPS)


def red_blue_ratio(frame):
    frame = np.asarray(frame, dtype=np.float64)
    return float(frame[..., 0].mean()) / max(float(frame[..., 2].mean()), EPS)


_PROXIES = {
    EffectKind.EXPOSURE: lambda f: float(luma(f).mean()),
    EffectKind.TEMPERATURE: red_blue_ratio,
    EffectKind.ZOOM: edge_density,
    EffectKind.BOKEH: inverse_laplacian_variance,
}


@dataclass
class FidelityProxy:
    effect: EffectKind
    signal: list


def proxy_signal(effect, frames):
    effect = EffectKind.parse(effect)
    if effect not in _PROXIES:
        raise UnsupportedEffect(f"no fidelity proxy is defined for {effect.value}")
    frames = list(frames)
    if not frames:
        raise InvalidArgument("proxy_signal needs at least one frame")
    fn = _PROXIES[effect]
    return FidelityProxy(effect, [fn(f) for f in frames])


def pearson_r(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape or x.size < 2:
        raise InvalidArgument("pearson_r needs two equal-length 1-D sequences of length >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelation("correlation is undefined for a constant series")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def metric_json(name, value, per_frame=None):
    """JSON-ready record; infinities become the string ``"inf"``."""
    def enc(v):
        if v is None:
            return None
        return "inf" if v == math.inf else v
    return {"metric": name, "value": enc(value), "per_frame": [enc(v) for v in (per_frame or [])]}
