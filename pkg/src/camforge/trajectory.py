"""Per-effect parameter trajectories: generation, normalisation, delta form, I/O.

A trajectory is a ``T x D`` matrix of absolute camera parameters, one row per
frame. Generation draws a natural cubic spline through a random start value,
one to three random interior anchors and a random end value, samples it at
``T`` uniform times and clamps it to the effect's physical range.

Randomness comes from numpy's PCG64 bit generator seeded through a
``SeedSequence`` built from ``(seed, effect index, item index)``. PCG64 and
SeedSequence are fully specified algorithms, so output is reproducible across
platforms and independent of thread scheduling.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InvalidArgument, ParseError


class EffectKind(enum.Enum):
    BOKEH = "bokeh"
    EXPOSURE = "exposure"
    SHUTTER = "shutter"
    TEMPERATURE = "temperature"
    FISHEYE = "fisheye"
    ZOOM = "zoom"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            choices = ", ".join(e.value for e in cls)
            raise InvalidArgument(f"unknown effect {name!r}; expected one of {choices}") from None

    @property
    def index(self):
        return list(EffectKind).index(self)

    @property
    def dims(self):
        return len(PARAM_RANGES[self].min)


@dataclass(frozen=True)
class ParamRange:
    min: tuple
    max: tuple
    names: tuple

    @property
    def span(self):
        return np.asarray(self.max, dtype=np.float64) - np.asarray(self.min, dtype=np.float64)


PARAM_RANGES = {
    EffectKind.BOKEH: ParamRange((0.0, 0.0), (25.0, 1.0), ("K", "focus")),
    EffectKind.EXPOSURE: ParamRange((-3.0,), (3.0,), ("ev",)),
    EffectKind.SHUTTER: ParamRange((5.0,), (50.0,), ("fps",)),
    EffectKind.TEMPERATURE: ParamRange((3000.0,), (9000.0,), ("kelvin",)),
    EffectKind.FISHEYE: ParamRange((0.2,), (1.4,), ("xi",)),
    EffectKind.ZOOM: ParamRange((25.0,), (100.0,), ("focal_mm",)),
}

# Fisheye is generated over xi only; lens mode and zoom are carried as constants.
FISHEYE_RESERVED = {"lensmode": 0, "zoom": 0}


@dataclass(frozen=True, eq=False)
class Trajectory:
    effect: EffectKind
    values: np.ndarray
    seed: int = 0

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[1] != self.effect.dims:
            raise InvalidArgument(
                f"{self.effect.value} trajectory needs shape (T, {self.effect.dims}), got {values.shape}"
            )
        if values.shape[0] < 2:
            raise InvalidArgument("a trajectory needs at least 2 frames")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def frames(self):
        return self.values.shape[0]

    @property
    def range(self):
        return PARAM_RANGES[self.effect]

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.effect is other.effect
            and self.seed == other.seed
            and np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True, eq=False)
class DeltaTrajectory:
    effect: EffectKind
    deltas: np.ndarray


def _seed_sequence(seed, effect_index, item):
    seed = int(seed)
    # SeedSequence wants non-negative words; keep the sign as its own word.
    words = [abs(seed) & 0xFFFFFFFFFFFFFFFF, abs(seed) >> 64, int(seed < 0), effect_index, int(item)]
    return np.random.SeedSequence(words)


def make_rng(seed, effect_index=0, item=0):
    """PCG64 generator for the stream ``(seed, effect_index, item)``."""
    return np.random.Generator(np.random.PCG64(_seed_sequence(seed, effect_index, item)))


def gen_trajectory(effect, frames, seed, item=0):
    effect = EffectKind.parse(effect)
    if int(frames) != frames or frames < 2:
        raise InvalidArgument(f"frames must be an integer >= 2, got {frames!r}")
    frames = int(frames)
    rng = make_rng(seed, effect.index, item)
    prange = PARAM_RANGES[effect]
    lo = np.asarray(prange.min)
    hi = np.asarray(prange.max)

    n_anchor = int(rng.integers(1, 4))
    while True:
        times = np.sort(rng.random(n_anchor))
        knots = np.concatenate(([0.0], times, [1.0]))
        if np.all(np.diff(knots) > 0):
            break
    anchors = rng.uniform(lo, hi, size=(n_anchor + 2, lo.size))

    spline = CubicSpline(knots, anchors, bc_type="natural", axis=0)
    values = np.clip(spline(np.linspace(0.0, 1.0, frames)), lo, hi)
    return Trajectory(effect, values, seed=int(seed))


def to_delta(traj):
    """Anchor-relative controls ``(theta_t - theta_1) / range``."""
    span = traj.range.span
    deltas = (traj.values - traj.values[0]) / span
    return DeltaTrajectory(traj.effect, deltas)


def normalize01(traj):
    lo = np.asarray(traj.range.min)
    return (traj.values - lo) / traj.range.span


def smooth_box5(series, mode="truncate"):
    """Centred length-5 moving average along the first axis.

    ``mode="truncate"`` shrinks the window at the ends and divides by the
    number of samples actually present. ``mode="circular"`` wraps around
    instead, so no boundary handling is involved.
    """
    x = np.asarray(series, dtype=np.float64)
    n = x.shape[0]
    if n < 1:
        raise InvalidArgument("cannot smooth an empty series")
    out = np.empty_like(x)
    if mode == "truncate":
        for i in range(n):
            lo, hi = max(0, i - 2), min(n, i + 3)
            out[i] = x[lo:hi].sum(axis=0) / (hi - lo)
    elif mode == "circular":
        for i in range(n):
            idx = np.arange(i - 2, i + 3) % n
            out[i] = x[idx].sum(axis=0) / 5.0
    else:
        raise InvalidArgument(f"unknown smoothing mode {mode!r}")
    return out


def trajectory_to_dict(traj, include_delta=True):
    prange = traj.range
    doc = {
        "effect": traj.effect.value,
        "frames": traj.frames,
        "seed": traj.seed,
        "values": traj.values.tolist(),
        "range": {"min": list(prange.min), "max": list(prange.max)},
    }
    if traj.effect is EffectKind.FISHEYE:
        doc["reserved"] = dict(FISHEYE_RESERVED)
    if include_delta:
        doc["delta"] = to_delta(traj).deltas.tolist()
    return doc


def serialize_trajectory(traj, include_delta=True):
    # json emits shortest round-trip float reprs, so parsing is exact
    return json.dumps(trajectory_to_dict(traj, include_delta)) + "\n"


def trajectory_from_dict(doc):
    if not isinstance(doc, dict):
        raise ParseError("trajectory sidecar must be a JSON object")
    for key in ("effect", "frames", "seed", "values"):
        if key not in doc:
            raise ParseError(f"trajectory sidecar missing field {key!r}", field=key)
    try:
        effect = EffectKind.parse(doc["effect"])
    except InvalidArgument as exc:
        raise ParseError(f"bad field 'effect': {exc}", field="effect") from None
    frames = doc["frames"]
    if not isinstance(frames, int) or isinstance(frames, bool):
        raise ParseError("field 'frames' must be an integer", field="frames")
    seed = doc["seed"]
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ParseError("field 'seed' must be an integer", field="seed")
    try:
        values = np.array(doc["values"], dtype=np.float64)
    except (TypeError, ValueError):
        raise ParseError("field 'values' must be a numeric matrix", field="values") from None
    if values.ndim != 2 or values.shape != (frames, effect.dims):
        raise ParseError(
            f"field 'values' has shape {values.shape}, expected ({frames}, {effect.dims})", field="values"
        )
    if not np.all(np.isfinite(values)):
        raise ParseError("field 'values' contains non-finite numbers", field="values")
    if "range" in doc:
        prange = PARAM_RANGES[effect]
        rng_doc = doc["range"]
        try:
            ok = (
                isinstance(rng_doc, dict)
                and [float(v) for v in rng_doc["min"]] == list(prange.min)
                and [float(v) for v in rng_doc["max"]] == list(prange.max)
            )
        except (KeyError, TypeError, ValueError):
            ok = False
        if not ok:
            raise ParseError("field 'range' does not match the effect's parameter range", field="range")
    try:
        return Trajectory(effect, values, seed=seed)
    except InvalidArgument as exc:
        raise ParseError(str(exc), field="values") from None


def parse_trajectory(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"trajectory sidecar is not valid JSON: {exc}") from None
    return trajectory_from_dict(doc)
