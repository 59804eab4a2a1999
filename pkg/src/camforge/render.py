"""Render a whole clip under one effect trajectory."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import pixel_effects as px
from . import proxy_effects as pe
from .errors import DependencyError, InvalidArgument
from .trajectory import EffectKind, smooth_box5

DEFAULT_BASE_FPS = 24.0


def _map(fn, items, jobs):
    if jobs <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _per_frame_maps(maps, frames, what):
    if maps is None:
        raise DependencyError(f"{what} maps are required for this effect", missing=what)
    maps = list(maps)
    # flow between consecutive frames may come as T-1 fields; reuse the last
    if what == "flow" and len(maps) == frames - 1 and maps:
        maps.append(maps[-1])
    if len(maps) != frames:
        raise DependencyError(f"expected {frames} {what} maps, got {len(maps)}", missing=what)
    return maps


def render_clip(effect, traj, frames, depth=None, flow=None, base_fps=DEFAULT_BASE_FPS, jobs=1):
    """Apply ``effect`` to every frame with the parameters in ``traj``.

    ``jobs`` only controls the number of worker threads; output is identical
    for any value.
    """
    effect = EffectKind.parse(effect)
    if traj.effect is not effect:
        raise InvalidArgument(f"trajectory is for {traj.effect.value}, not {effect.value}")
    frames = list(frames)
    n = len(frames)
    if traj.frames != n:
        raise InvalidArgument(f"trajectory has {traj.frames} frames but the clip has {n}")
    vals = traj.values
    idx = range(n)

    if effect is EffectKind.EXPOSURE:
        return _map(lambda t: px.apply_exposure(frames[t], float(vals[t, 0])), idx, jobs)
    if effect is EffectKind.TEMPERATURE:
        return _map(lambda t: px.apply_temperature(frames[t], float(vals[t, 0])), idx, jobs)
    if effect is EffectKind.FISHEYE:
        return _map(lambda t: px.apply_fisheye(frames[t], float(vals[t, 0])), idx, jobs)
    if effect is EffectKind.ZOOM:
        return _map(lambda t: px.zoom_crop(frames[t], float(vals[t, 0])), idx, jobs)
    if effect is EffectKind.BOKEH:
        depth = [pe.normalize_depth(d) for d in _per_frame_maps(depth, n, "depth")]
        return _map(
            lambda t: pe.render_bokeh(frames[t], depth[t], float(vals[t, 0]), float(vals[t, 1])), idx, jobs
        )

    # shutter: one blur mode per clip, smoothed scalar and mean flow
    flow = [np.asarray(f, dtype=np.float64) for f in _per_frame_maps(flow, n, "flow")]
    scalars = smooth_box5([pe.shutter_scalar(base_fps, float(v)) for v in vals[:, 0]])
    scalars = np.clip(scalars, 0.5, 4.0)
    mode = pe.select_blur_mode(flow)
    if mode is pe.BlurMode.OBJECT_MOTION:
        return _map(lambda t: pe.motion_blur_object(frames[t], flow[t], float(scalars[t])), idx, jobs)
    mean_flow = smooth_box5(np.array([f.reshape(-1, 2).mean(axis=0) for f in flow]))
    return _map(lambda t: pe.motion_blur_camera(frames[t], mean_flow[t], float(scalars[t])), idx, jobs)
