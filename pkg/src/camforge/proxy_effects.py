"""Effects driven by ingested proxy maps: depth-of-field and motion blur."""

import enum
import math

import numpy as np

from . import kernels
from .errors import DataError, InvalidArgument
from .pixel_effects import delinearize, linearize

OBJECT_MOTION_STD_PX = 5.0
OBJECT_MOTION_SAMPLES = 24
CAMERA_KERNEL_SIZE = 33
CAMERA_SIGMA_PERP = 1.5
CAMERA_SIGMA_ALONG_MAX = 8.0
MIN_DISK_RADIUS = 0.5


class BlurMode(enum.Enum):
    OBJECT_MOTION = "object"
    CAMERA_MOTION = "camera"


def normalize_depth(raw):
    raw = np.asarray(raw, dtype=np.float64)
    if not np.all(np.isfinite(raw)):
        raise DataError("depth map contains non-finite values")
    lo, hi = raw.min(), raw.max()
    if hi == lo:
        return np.zeros_like(raw)
    return (raw - lo) / (hi - lo)


def normalize_flow_global(clip):
    """Divide every flow field of a clip by the clip-wide maximum magnitude."""
    clip = [np.asarray(f, dtype=np.float64) for f in clip]
    if not clip:
        raise InvalidArgument("flow clip is empty")
    peak = max(float(np.hypot(f[..., 0], f[..., 1]).max()) for f in clip)
    if peak == 0:
        return [f.copy() for f in clip]
    return [f / peak for f in clip]


def defocus_radius(depth, K, d_focus):
    return K * (depth - d_focus) / 10.0


def bokeh_accumulate(frame, depth, K, d_focus):
    """Scatter linear colour over defocus disks; returns (sum of colour, sum of weight).

    Every source pixel spreads its colour with weight ``1 / disk pixel count``
    over a disk of radius ``max(|delta|, 0.5)``, so the weights leaving each
    source sum to one before boundary loss.
    """
    frame = np.asarray(frame, dtype=np.float64)
    depth = np.asarray(depth, dtype=np.float64)
    if frame.shape[:2] != depth.shape:
        raise InvalidArgument(f"frame {frame.shape[:2]} and depth {depth.shape} differ in size")
    if not 0.0 <= K <= 25.0:
        raise InvalidArgument(f"K must lie in [0, 25], got {K}")
    if not 0.0 <= d_focus <= 1.0:
        raise InvalidArgument(f"d_focus must lie in [0, 1], got {d_focus}")
    radius = np.maximum(np.abs(defocus_radius(depth, K, d_focus)), MIN_DISK_RADIUS)
    return kernels.bokeh_scatter(linearize(frame), radius)


def render_bokeh(frame, depth, K, d_focus):
    acc, wsum = bokeh_accumulate(frame, depth, K, d_focus)
    return delinearize(acc / wsum[..., None])


def shutter_scalar(base_fps, target_fps):
    if base_fps <= 0 or target_fps <= 0:
        raise InvalidArgument(f"frame rates must be positive, got {base_fps} and {target_fps}")
    return min(max(base_fps / target_fps, 0.5), 4.0)


def flow_magnitude_std(flow):
    """Population standard deviation of per-pixel flow magnitudes."""
    flow = np.asarray(flow, dtype=np.float64)
    return float(np.hypot(flow[..., 0], flow[..., 1]).std())


def select_blur_mode(clip):
    clip = list(clip)
    if not clip:
        raise InvalidArgument("flow clip is empty")
    mean_std = math.fsum(flow_magnitude_std(f) for f in clip) / len(clip)
    return BlurMode.OBJECT_MOTION if mean_std > OBJECT_MOTION_STD_PX else BlurMode.CAMERA_MOTION


def _check_s(s):
    if not 0.5 <= s <= 4.0:
        raise InvalidArgument(f"shutter scalar must lie in [0.5, 4], got {s}")


def motion_blur_object(frame, flow, s):
    """Average 24 bilinear samples along ``+-(s/2) * flow`` centred on each pixel."""
    _check_s(s)
    frame = np.asarray(frame, dtype=np.float64)
    flow = np.asarray(flow, dtype=np.float64)
    if flow.shape != frame.shape[:2] + (2,):
        raise InvalidArgument(f"flow {flow.shape} does not match frame {frame.shape}")
    if not np.any(flow):
        return frame.copy()
    return kernels.flow_blur(frame, flow, s, OBJECT_MOTION_SAMPLES)


def camera_blur_kernel(mean_flow, s, size=CAMERA_KERNEL_SIZE):
    """Unit-sum Gaussian elongated along ``mean_flow``.

    Thickness across the motion is 1.5 px; the along-motion sigma is
    ``s * |flow| / 2`` held between 1.5 and 8 px, so a vanishing flow gives an
    isotropic sigma-1.5 blur.
    """
    fx, fy = float(mean_flow[0]), float(mean_flow[1])
    mag = math.hypot(fx, fy)
    sigma_along = min(max(s * mag / 2.0, CAMERA_SIGMA_PERP), CAMERA_SIGMA_ALONG_MAX)
    if mag > 0:
        dx, dy = fx / mag, fy / mag
    else:
        dx, dy = 1.0, 0.0
    half = size // 2
    yy, xx = np.mgrid[-half:half + 1, -half:half + 1].astype(np.float64)
    along = xx * dx + yy * dy
    perp = -xx * dy + yy * dx
    k = np.exp(-0.5 * (along / sigma_along) ** 2 - 0.5 * (perp / CAMERA_SIGMA_PERP) ** 2)
    return k / k.sum()


def motion_blur_camera(frame, mean_flow, s):
    _check_s(s)
    frame = np.asarray(frame, dtype=np.float64)
    out = kernels.correlate_clamped(frame, camera_blur_kernel(mean_flow, s))
    return np.clip(out, 0.0, 1.0)
