"""Effect-fidelity sweeps: render a fixed scene at evenly spaced control levels
and correlate the requested level with a proxy measured on the output.

Each effect's proxy moves in a known direction as the effect strengthens, so
the level is oriented to "effect intensity" before correlating: warmth rises
as the Kelvin value falls, and zooming in (longer focal length) lowers edge
density. Exposure and bokeh strength are used as-is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import metrics
from . import pixel_effects as px
from . import proxy_effects as pe
from .errors import DependencyError, UnsupportedEffect
from .trajectory import PARAM_RANGES, EffectKind

INTENSITY_SIGN = {
    EffectKind.EXPOSURE: 1.0,
    EffectKind.TEMPERATURE: -1.0,
    EffectKind.ZOOM: -1.0,
    EffectKind.BOKEH: 1.0,
}


@dataclass
class FidelityResult:
    effect: EffectKind
    levels: list
    intensity: list
    signal: list
    r: float

    def csv(self):
        rows = ["level,intensity,signal"]
        rows += [f"{lv!r},{it!r},{sg!r}" for lv, it, sg in zip(self.levels, self.intensity, self.signal)]
        return "\n".join(rows) + "\n"


def _render_level(effect, scene, level, focus):
    if effect is EffectKind.EXPOSURE:
        return [px.apply_exposure(f, level) for f in scene.frames]
    if effect is EffectKind.TEMPERATURE:
        return [px.apply_temperature(f, level) for f in scene.frames]
    if effect is EffectKind.ZOOM:
        return [px.zoom_crop(f, level) for f in scene.frames]
    if scene.depth is None:
        raise DependencyError("bokeh sweep needs depth maps", missing="depth")
    return [pe.render_bokeh(f, pe.normalize_depth(d), level, focus) for f, d in zip(scene.frames, scene.depth)]


def fidelity_sweep(effect, scene, n_levels=10, focus=0.0):
    """Sweep the effect's primary control over its full range in ``n_levels`` steps."""
    effect = EffectKind.parse(effect)
    if effect not in INTENSITY_SIGN:
        raise UnsupportedEffect(f"no fidelity proxy is defined for {effect.value}")
    prange = PARAM_RANGES[effect]
    levels = np.linspace(prange.min[0], prange.max[0], n_levels)
    signal = []
    for level in levels:
        frames = _render_level(effect, scene, float(level), focus)
        signal.append(float(np.mean(metrics.proxy_signal(effect, frames).signal)))
    intensity = INTENSITY_SIGN[effect] * levels
    r = metrics.pearson_r(intensity, signal)
    return FidelityResult(effect, levels.tolist(), intensity.tolist(), signal, r)
