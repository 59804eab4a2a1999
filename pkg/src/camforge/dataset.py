"""Triplet, batch and still-image clip composition.

Each written clip is a directory::

    frames/NNNN.ppm         rendered frames
    maps/depth_NNNN.pfm     min-max normalised depth (when available)
    maps/flow_NNNN.pfm      globally normalised flow, stacked planes + .json
    meta.json               role, scene, effect, seed and trajectory sidecar
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import media_io
from . import proxy_effects as pe
from .errors import DependencyError, InvalidArgument
from .render import DEFAULT_BASE_FPS, render_clip
from .trajectory import EffectKind, gen_trajectory, make_rng, trajectory_to_dict

ROLES = ("anchor", "content", "style")
MAX_TRAJECTORY_ATTEMPTS = 8
DISTINCT_TOL = 1e-6
STILL_FRAMES = 81
PERSPECTIVE_CHANNELS = 4


@dataclass(frozen=True)
class BatchSpec:
    videos_per_batch: int = 5
    augmentations_per_video: int = 6


@dataclass
class Clip:
    role: str
    scene: str
    effect: EffectKind
    seed: int
    trajectory: object
    frames: list
    depth: list = None
    flow: list = None

    def meta(self):
        return {
            "role": self.role,
            "scene": self.scene,
            "effect": self.effect.value,
            "seed": self.seed,
            "frames": len(self.frames),
            "trajectory": trajectory_to_dict(self.trajectory),
        }


@dataclass
class Triplet:
    anchor: Clip
    content: Clip
    style: Clip

    def clips(self):
        return (self.anchor, self.content, self.style)

    def manifest(self):
        return [{"scene": c.scene, "effect": c.effect.value, "seed": c.seed, "role": c.role} for c in self.clips()]


def _require_maps(scene, effect):
    if effect is EffectKind.BOKEH and scene.depth is None:
        raise DependencyError(f"scene {scene.name!r} has no depth maps, required for bokeh", missing="depth")
    if effect is EffectKind.SHUTTER and scene.flow is None:
        raise DependencyError(f"scene {scene.name!r} has no flow maps, required for shutter", missing="flow")


def distinct_trajectory(effect, frames, reference, seed):
    """First trajectory from seeds ``seed, seed+1, ...`` that differs from ``reference``."""
    for attempt in range(MAX_TRAJECTORY_ATTEMPTS):
        traj = gen_trajectory(effect, frames, seed + attempt)
        if np.max(np.abs(traj.values - reference.values)) > DISTINCT_TOL:
            return traj
    raise InvalidArgument(
        f"could not draw a trajectory distinct from seed {reference.seed} in {MAX_TRAJECTORY_ATTEMPTS} attempts"
    )


def build_triplet(scene_a, scene_b, effect, seed, base_fps=DEFAULT_BASE_FPS, jobs=1):
    """Anchor, same-scene/new-trajectory and same-trajectory/new-scene clips."""
    effect = EffectKind.parse(effect)
    if len(scene_a) != len(scene_b):
        raise InvalidArgument(f"scenes have {len(scene_a)} and {len(scene_b)} frames; they must match")
    for sc in (scene_a, scene_b):
        _require_maps(sc, effect)
    n = len(scene_a)
    traj_a = gen_trajectory(effect, n, seed)
    traj_c = distinct_trajectory(effect, n, traj_a, seed + 1)

    def clip(role, scene, traj):
        frames = render_clip(effect, traj, scene.frames, scene.depth, scene.flow, base_fps=base_fps, jobs=jobs)
        depth = [pe.normalize_depth(d) for d in scene.depth] if scene.depth is not None else None
        flow = pe.normalize_flow_global(scene.flow) if scene.flow is not None else None
        return Clip(role, scene.name, effect, traj.seed, traj, frames, depth, flow)

    return Triplet(
        clip("anchor", scene_a, traj_a),
        clip("content", scene_a, traj_c),
        clip("style", scene_b, traj_a),
    )


def write_clip(clip, directory, extra_meta=None):
    directory = Path(directory)
    for i, f in enumerate(clip.frames):
        media_io.write_ppm(directory / "frames" / f"{i:04d}.ppm", f)
    for i, d in enumerate(clip.depth or []):
        media_io.write_pfm(directory / "maps" / f"depth_{i:04d}.pfm", np.asarray(d, dtype=np.float32))
    for i, fl in enumerate(clip.flow or []):
        media_io.write_pfm(directory / "maps" / f"flow_{i:04d}.pfm", np.asarray(fl, dtype=np.float32))
    meta = clip.meta()
    meta.update(extra_meta or {})
    media_io.write_json(directory / "meta.json", meta)


def write_triplet(triplet, directory):
    directory = Path(directory)
    for c in triplet.clips():
        write_clip(c, directory / c.role)
    media_io.write_json(directory / "manifest.json", triplet.manifest())


@dataclass
class StillClip:
    frames: list
    depth: list
    flow: list
    perspective: list


def inflate_still(image, frames=STILL_FRAMES, depth=None):
    """Replicate a still into a static clip; flow and perspective maps are zero."""
    if int(frames) != frames or frames < 1:
        raise InvalidArgument(f"frames must be a positive integer, got {frames!r}")
    image = np.asarray(image, dtype=np.float64)
    h, w = image.shape[:2]
    zero_flow = np.zeros((h, w, 2))
    zero_persp = np.zeros((h, w, PERSPECTIVE_CHANNELS))
    depth_list = None if depth is None else [np.asarray(depth, dtype=np.float64)] * frames
    return StillClip([image] * frames, depth_list, [zero_flow] * frames, [zero_persp] * frames)


def write_still_clip(clip, directory, meta):
    directory = Path(directory)
    for i, f in enumerate(clip.frames):
        media_io.write_ppm(directory / "frames" / f"{i:04d}.ppm", f)
    for i, d in enumerate(clip.depth or []):
        media_io.write_pfm(directory / "maps" / f"depth_{i:04d}.pfm", np.asarray(d, dtype=np.float32))
    for i, fl in enumerate(clip.flow):
        media_io.write_pfm(directory / "maps" / f"flow_{i:04d}.pfm", np.asarray(fl, dtype=np.float32))
    for i, p in enumerate(clip.perspective):
        media_io.write_pfm(directory / "maps" / f"persp_{i:04d}.pfm", np.asarray(p, dtype=np.float32))
    media_io.write_json(directory / "meta.json", meta)


def compose_batch(spec, scenes, seed, effects=None):
    """Manifest of ``videos x augmentations`` (scene, effect, trajectory seed) entries."""
    scenes = [str(s) for s in scenes]
    if spec.videos_per_batch < 1 or spec.augmentations_per_video < 1:
        raise InvalidArgument("batch spec counts must be positive")
    if len(scenes) < spec.videos_per_batch:
        raise InvalidArgument(f"need at least {spec.videos_per_batch} scenes, got {len(scenes)}")
    effects = [EffectKind.parse(e) for e in (effects or list(EffectKind))]
    rng = make_rng(seed, 0xBA, 0)
    picked = rng.choice(len(scenes), size=spec.videos_per_batch, replace=False)
    entries = []
    for idx in picked:
        for _ in range(spec.augmentations_per_video):
            effect = effects[int(rng.integers(len(effects)))]
            entries.append({
                "scene": scenes[int(idx)],
                "effect": effect.value,
                "seed": int(rng.integers(0, 2**31 - 1)),
                "role": "anchor",
            })
    return entries
