"""Per-frame photometric and geometric renderers.

Frames are ``H x W x 3`` float arrays holding gamma-encoded values in [0, 1].
Exposure works in linear light (inverse gamma 2.2); temperature gains and the
vignette multiply the encoded values directly.

Grid coordinates follow the ``align_corners=False`` convention: -1 and +1 are
the outer edges of the border pixels, so pixel ``j`` of a width-``W`` image
sits at ``(2j + 1) / W - 1``.
"""

import math

import numpy as np

from . import kernels
from .errors import InvalidArgument

GAMMA = 2.2
BASE_FOCAL_MM = 25.0
VIGNETTE_STRENGTH = 0.6


def _check_frame(frame):
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise InvalidArgument(f"expected an H x W x 3 frame, got shape {frame.shape}")
    return frame


def linearize(frame):
    return np.power(frame, GAMMA)


def delinearize(lin):
    return np.power(np.clip(lin, 0.0, 1.0), 1.0 / GAMMA)


def apply_exposure(frame, delta_ev):
    if not -3.0 <= delta_ev <= 3.0:
        raise InvalidArgument(f"delta_ev must lie in [-3, 3], got {delta_ev}")
    frame = _check_frame(frame)
    if delta_ev == 0:
        return frame.copy()
    gain = 2.0 ** delta_ev
    return np.power(np.minimum(np.power(frame, GAMMA) * gain, 1.0), 1.0 / GAMMA)


def kelvin_gains(temperature):
    """Per-channel white-balance gains from Tanner Helland's Kelvin-to-RGB fit.

    Each channel is evaluated on the 0-255 scale at ``t = T / 100``, clipped
    to [0, 255] and divided by 255.
    """
    if not 3000.0 <= temperature <= 9000.0:
        raise InvalidArgument(f"temperature must lie in [3000, 9000] K, got {temperature}")
    t = temperature / 100.0
    if t <= 66.0:
        red = 255.0
        green = 99.4708025861 * math.log(t) - 161.1195681661
    else:
        red = 329.698727446 * (t - 60.0) ** -0.1332047592
        green = 288.1221695283 * (t - 60.0) ** -0.0755148492
    if t >= 66.0:
        blue = 255.0
    elif t <= 19.0:
        blue = 0.0
    else:
        blue = 138.5177312231 * math.log(t - 10.0) - 305.0447927307
    return tuple(min(max(v, 0.0), 255.0) / 255.0 for v in (red, green, blue))


def apply_temperature(frame, temperature):
    gains = np.asarray(kelvin_gains(temperature))
    frame = _check_frame(frame)
    if np.all(gains == 1.0):
        return frame.copy()
    return np.clip(frame * gains, 0.0, 1.0)


def pixel_centers(n):
    """Normalised coordinates of the centres of ``n`` pixels along one axis."""
    return (2.0 * np.arange(n) + 1.0) / n - 1.0


def identity_grid(width, height):
    gx = pixel_centers(width)
    gy = pixel_centers(height)
    grid = np.empty((height, width, 2))
    grid[..., 0] = gx[None, :]
    grid[..., 1] = gy[:, None]
    return grid


def usm_project(u, v, xi):
    """Inverse unified-sphere lift of (u, v) followed by pinhole reprojection."""
    rho2 = u * u + v * v
    alpha = (xi + np.sqrt(1.0 + (1.0 - xi * xi) * rho2)) / (1.0 + rho2)
    dz = alpha - xi
    return alpha * u / dz, alpha * v / dz


def fisheye_grid(width, height, xi):
    """Sampling grid that warps a rectilinear frame into a barrel fisheye.

    Output pixel centres are scaled by ``0.7 / (1 + xi)``, pushed through the
    unified sphere model and the resulting source coordinates are rescaled so
    that their bounding box spans [-1, 1] on each axis.
    """
    if not math.isfinite(xi):
        raise InvalidArgument(f"xi must be finite, got {xi}")
    if not 0.0 <= xi <= 1.8:
        raise InvalidArgument(f"xi must lie in [0, 1.8], got {xi}")
    z = 0.7 / (1.0 + xi)
    base = identity_grid(width, height)
    sx, sy = usm_project(base[..., 0] * z, base[..., 1] * z, xi)
    grid = np.empty_like(base)
    for axis, coord in enumerate((sx, sy)):
        lo, hi = coord.min(), coord.max()
        # a 1-pixel axis has no extent to normalise
        grid[..., axis] = 0.0 if hi == lo else 2.0 * (coord - lo) / (hi - lo) - 1.0
    if not np.all(np.isfinite(grid)):
        raise InvalidArgument(f"fisheye grid is not finite for xi={xi}")
    return grid


def grid_sample_bicubic(frame, grid):
    """Catmull-Rom resampling at normalised grid positions, edge-clamped."""
    frame = np.asarray(frame, dtype=np.float64)
    return np.clip(kernels.grid_sample_bicubic(frame, grid), 0.0, 1.0)


def apply_vignette(frame, strength=VIGNETTE_STRENGTH):
    if not 0.0 <= strength <= 1.0:
        raise InvalidArgument(f"vignette strength must lie in [0, 1], got {strength}")
    frame = np.asarray(frame, dtype=np.float64)
    if strength == 0:
        return frame.copy()
    h, w = frame.shape[:2]
    # pixel centres relative to the image centre; corner pixel centres get r = 1
    yy = np.arange(h) - (h - 1) / 2.0
    xx = np.arange(w) - (w - 1) / 2.0
    rmax2 = ((h - 1) / 2.0) ** 2 + ((w - 1) / 2.0) ** 2
    r2 = (yy[:, None] ** 2 + xx[None, :] ** 2) / rmax2 if rmax2 > 0 else np.zeros((h, w))
    return frame * np.maximum(0.0, 1.0 - strength * r2)[..., None]


def apply_fisheye(frame, xi, vignette=VIGNETTE_STRENGTH):
    frame = _check_frame(frame)
    h, w = frame.shape[:2]
    warped = grid_sample_bicubic(frame, fisheye_grid(w, h, xi))
    return apply_vignette(warped, vignette)


def zoom_scale(focal_mm):
    if not 25.0 <= focal_mm <= 100.0:
        raise InvalidArgument(f"focal length must lie in [25, 100] mm, got {focal_mm}")
    return BASE_FOCAL_MM / focal_mm


def zoom_region(height, width, focal_mm):
    """Source-pixel extent ``(rows, cols)`` of the centre crop at ``focal_mm``."""
    s = zoom_scale(focal_mm)
    return math.floor(height * s), math.floor(width * s)


def zoom_grid(out_w, out_h, focal_mm):
    s = zoom_scale(focal_mm)
    return identity_grid(out_w, out_h) * s


def zoom_crop(source, focal_mm, out_w=None, out_h=None):
    """Centre crop of normalised half-extent ``25 / f``, resampled bicubically.

    The crop is defined in normalised coordinates, so a source held above
    the output resolution is supersampled rather than pre-downscaled.
    """
    source = _check_frame(source)
    h, w = source.shape[:2]
    out_w = w if out_w is None else int(out_w)
    out_h = h if out_h is None else int(out_h)
    if out_w < 1 or out_h < 1 or h < out_h or w < out_w:
        raise InvalidArgument(f"source {w}x{h} is smaller than the requested output {out_w}x{out_h}")
    s = zoom_scale(focal_mm)
    if s == 1.0 and (out_w, out_h) == (w, h):
        return source.copy()
    return grid_sample_bicubic(source, zoom_grid(out_w, out_h, focal_mm))
