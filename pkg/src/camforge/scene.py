"""Scene containers plus a procedural test scene with depth and flow.

A scene directory holds ``frames/NNNN.ppm`` and optionally
``maps/depth_NNNN.pfm`` and ``maps/flow_NNNN.pfm`` (2-channel flow stored as
stacked planes with a JSON sidecar).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import media_io
from .errors import InvalidArgument
from .trajectory import make_rng


@dataclass
class Scene:
    name: str
    frames: list
    depth: Optional[list] = None
    flow: Optional[list] = None

    def __post_init__(self):
        if not self.frames:
            raise InvalidArgument(f"scene {self.name!r} has no frames")
        shape = self.frames[0].shape
        if any(f.shape != shape for f in self.frames):
            raise InvalidArgument(f"scene {self.name!r} mixes frame sizes")

    @property
    def size(self):
        return self.frames[0].shape[:2]

    def __len__(self):
        return len(self.frames)


def load_scene(directory, name=None):
    directory = Path(directory)
    frames = media_io.read_frames(directory / "frames")
    maps = directory / "maps"
    depth = flow = None
    if maps.is_dir():
        if media_io.list_numbered(maps, ".pfm", "depth_"):
            depth = media_io.read_maps(maps, "depth_")
        if media_io.list_numbered(maps, ".pfm", "flow_"):
            flow = media_io.read_maps(maps, "flow_")
    return Scene(name or directory.name, frames, depth, flow)


def save_scene(scene, directory):
    directory = Path(directory)
    for i, f in enumerate(scene.frames):
        media_io.write_ppm(directory / "frames" / f"{i:04d}.ppm", f)
    for i, d in enumerate(scene.depth or []):
        media_io.write_pfm(directory / "maps" / f"depth_{i:04d}.pfm", np.asarray(d, dtype=np.float32))
    for i, fl in enumerate(scene.flow or []):
        media_io.write_pfm(directory / "maps" / f"flow_{i:04d}.pfm", np.asarray(fl, dtype=np.float32))


def make_test_scene(height=480, width=832, frames=3, pan_px=4, seed=0):
    """Textured synthetic scene: a horizontal camera pan over shaded shapes.

    The histogram spans the full display range like a photograph (sky
    highlights, dark ground, shaded objects), every object carries its own
    depth, and the flow is the exact pan displacement.
    """
    rng = make_rng(seed, 0x5C, 0)
    cw = width + pan_px * max(frames - 1, 0)
    yy, xx = np.mgrid[0:height, 0:cw].astype(np.float64)
    ramp = yy / max(height - 1, 1)

    canvas = np.empty((height, cw, 3))
    canvas[..., 0] = 0.55 + 0.3 * (1 - ramp)
    canvas[..., 1] = 0.65 + 0.25 * (1 - ramp)
    canvas[..., 2] = 0.95 - 0.3 * ramp
    canvas *= (0.2 + 0.8 * (1 - ramp))[..., None]
    depth = 0.2 + 0.8 * ramp  # nearer towards the bottom

    # fine checker ground along the bottom
    band = yy > height * 0.72
    check = ((yy // 6 + xx // 6) % 2 == 0) & band
    canvas[check] = [0.85, 0.78, 0.62]
    canvas[band & ~check] = [0.06, 0.05, 0.04]

    n_shapes = max(8, (height * cw) // 6000)
    for _ in range(n_shapes):
        color = rng.uniform(0.0, 1.0, 3) ** 1.6
        d = rng.uniform(0.0, 1.0)
        if rng.random() < 0.5:
            h0 = rng.integers(6, max(7, height // 5))
            w0 = rng.integers(6, max(7, cw // 8))
            y0, x0 = rng.integers(0, height), rng.integers(0, cw)
            m = (yy >= y0) & (yy < y0 + h0) & (xx >= x0) & (xx < x0 + w0)
            shade = 1 - 0.35 * (yy - y0) / h0
        else:
            r = rng.uniform(4, max(5, height / 10))
            cy, cx = rng.uniform(0, height), rng.uniform(0, cw)
            dist = np.sqrt((yy - cy) ** 2 + (xx - cx) ** 2)
            m = dist <= r
            shade = 1 - 0.35 * dist / r
        canvas[m] = (color * shade[..., None])[m]
        depth[m] = d

    canvas = np.clip(canvas, 0.0, 1.0)
    out_frames, out_depth, out_flow = [], [], []
    for t in range(frames):
        x0 = t * pan_px
        out_frames.append(np.floor(canvas[:, x0:x0 + width] * 255 + 0.5) / 255)
        out_depth.append(depth[:, x0:x0 + width].copy())
        fl = np.zeros((height, width, 2))
        fl[..., 0] = -float(pan_px)
        out_flow.append(fl)
    return Scene(f"testscene-{seed}", out_frames, out_depth, out_flow)
