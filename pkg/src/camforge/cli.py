"""Command-line front end: ``camforge <command> ...``.

Every command that writes outputs also writes ``run.json``, an echo of the
resolved configuration, next to them. The echo leaves out the output path
and ``--jobs`` since neither changes what is produced.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__, losses, media_io, metrics
from .dataset import BatchSpec, build_triplet, compose_batch, inflate_still, write_still_clip, write_triplet
from .errors import CamforgeError, InvalidArgument
from .fidelity import fidelity_sweep
from .render import DEFAULT_BASE_FPS, render_clip
from .scene import Scene, load_scene, make_test_scene, save_scene
from .trajectory import EffectKind, gen_trajectory, parse_trajectory, serialize_trajectory, to_delta

EFFECT_NAMES = [e.value for e in EffectKind]
_NOT_ECHOED = {"output", "jobs", "func"}


def _default_seed():
    env = os.environ.get("CAMFORGE_SEED")
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise InvalidArgument(f"CAMFORGE_SEED must be an integer, got {env!r}") from None


def _echo(args):
    doc = {}
    for k, v in sorted(vars(args).items()):
        if k in _NOT_ECHOED:
            continue
        doc[k] = str(v) if isinstance(v, Path) else v
    doc["version"] = __version__
    return doc


@contextlib.contextmanager
def _output_dir(target):
    """Build a directory next to ``target`` and move it into place on success."""
    target = Path(target)
    if target.exists():
        if not target.is_dir():
            raise InvalidArgument(f"output {target} exists and is not a directory")
        if any(target.iterdir()) and not (target / "run.json").exists():
            raise InvalidArgument(f"refusing to replace non-empty directory {target} (no run.json inside)")
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{target.name}.", dir=target.parent))
    try:
        yield tmp
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    if target.exists():
        shutil.rmtree(target)
    os.replace(tmp, target)


def _write_result(args, doc, text=None):
    """Print a JSON result; with ``-o`` also write it plus the config echo."""
    body = text if text is not None else json.dumps(doc, indent=1, sort_keys=True) + "\n"
    sys.stdout.write(body)
    if getattr(args, "output", None):
        out = Path(args.output)
        media_io.atomic_write_text(out, body)
        media_io.write_json(out.parent / "run.json", _echo(args))


# -- traj --------------------------------------------------------------------

def cmd_traj_gen(args):
    traj = gen_trajectory(args.effect, args.frames, args.seed)
    text = serialize_trajectory(traj, include_delta=not args.no_delta)
    out = Path(args.output)
    media_io.atomic_write_text(out, text)
    media_io.write_json(out.parent / "run.json", _echo(args))
    return 0


def cmd_traj_delta(args):
    traj = parse_trajectory(Path(args.traj).read_text(encoding="utf-8"))
    _write_result(args, {"effect": traj.effect.value, "delta": to_delta(traj).deltas.tolist()})
    return 0


# -- render ------------------------------------------------------------------

def cmd_render(args):
    traj = parse_trajectory(Path(args.traj).read_text(encoding="utf-8"))
    frames = media_io.read_frames(args.frames)
    depth = media_io.read_maps(args.depth, "depth_") if args.depth else None
    flow = media_io.read_maps(args.flow, "flow_") if args.flow else None
    out = render_clip(args.effect, traj, frames, depth, flow, base_fps=args.base_fps, jobs=args.jobs)
    with _output_dir(args.output) as tmp:
        for i, f in enumerate(out):
            media_io.write_ppm(tmp / "frames" / f"{i:04d}.ppm", f)
        media_io.atomic_write_text(tmp / "trajectory.json", serialize_trajectory(traj))
        media_io.write_json(tmp / "run.json", _echo(args))
    return 0


# -- dataset -----------------------------------------------------------------

def cmd_dataset_triplet(args):
    scene_a = load_scene(args.scene_a)
    scene_b = load_scene(args.scene_b)
    if args.frames:
        scene_a = _truncate(scene_a, args.frames)
        scene_b = _truncate(scene_b, args.frames)
    triplet = build_triplet(scene_a, scene_b, args.effect, args.seed, base_fps=args.base_fps, jobs=args.jobs)
    with _output_dir(args.output) as tmp:
        write_triplet(triplet, tmp)
        media_io.write_json(tmp / "run.json", _echo(args))
    return 0


def _truncate(scene, n):
    if n > len(scene):
        raise InvalidArgument(f"scene {scene.name!r} has only {len(scene)} frames, asked for {n}")
    cut = lambda xs: None if xs is None else xs[:n]  # noqa: E731
    return Scene(scene.name, scene.frames[:n], cut(scene.depth), cut(scene.flow))


def cmd_dataset_inflate(args):
    image = media_io.read_ppm(args.image)
    depth = media_io.read_pfm(args.depth).astype(np.float64) if args.depth else None
    meta = {"source": Path(args.image).name, "frames": args.frames}
    if args.exif:
        rec = media_io.read_exif_sidecar(Path(args.exif).read_text(encoding="utf-8"))
        meta["exif"] = {"aperture": rec.aperture, "focal_length": rec.focal_length, "iso": rec.iso}
        meta["exif_normalized"] = media_io.normalize_exif_record(rec)
        if rec.extra:
            meta["exif_extra"] = rec.extra
    clip = inflate_still(image, args.frames, depth)
    with _output_dir(args.output) as tmp:
        write_still_clip(clip, tmp, meta)
        media_io.write_json(tmp / "run.json", _echo(args))
    return 0


def cmd_dataset_batch(args):
    spec = BatchSpec(args.videos, args.augmentations)
    effects = args.effect or None
    entries = compose_batch(spec, args.scenes, args.seed, effects)
    out = Path(args.output)
    media_io.write_json(out, entries)
    media_io.write_json(out.parent / "run.json", _echo(args))
    return 0


def cmd_dataset_scene(args):
    scene = make_test_scene(args.height, args.width, args.frames, pan_px=args.pan, seed=args.seed)
    with _output_dir(args.output) as tmp:
        save_scene(scene, tmp)
        media_io.write_json(tmp / "run.json", _echo(args))
    return 0


# -- metric ------------------------------------------------------------------

def _frames_arg(path):
    path = Path(path)
    return media_io.read_frames(path) if path.is_dir() else [media_io.read_ppm(path)]


def _pairwise(args, name, fn):
    a, b = _frames_arg(args.a), _frames_arg(args.b)
    if len(a) != len(b):
        raise InvalidArgument(f"{len(a)} frames vs {len(b)} frames")
    per = [fn(x, y) for x, y in zip(a, b)]
    finite = [v for v in per if v != float("inf")]
    if name == "psnr" and not finite:
        value = float("inf")
    elif name == "psnr":
        # identical frames carry no error; average the rest
        value = float(np.mean(finite))
    else:
        value = float(np.mean(per))
    _write_result(args, metrics.metric_json(name, value, per))
    return 0


def cmd_metric_psnr(args):
    return _pairwise(args, "psnr", metrics.psnr)


def cmd_metric_ssim(args):
    return _pairwise(args, "ssim", metrics.ssim)


def cmd_metric_wclip(args):
    gen = media_io.read_embeddings(args.gen)
    ref = media_io.read_embeddings(args.ref)
    rep = metrics.wclip_report(gen, ref, args.window)
    doc = metrics.metric_json(f"wclip-{args.window}", rep.value, rep.per_frame)
    doc["excluded"] = rep.excluded
    _write_result(args, doc)
    return 0


def cmd_metric_fidelity(args):
    scene = load_scene(args.scene)
    res = fidelity_sweep(args.effect, scene, n_levels=args.levels, focus=args.focus)
    doc = {"metric": "fidelity", "effect": res.effect.value, "value": res.r, "per_frame": res.signal,
           "levels": res.levels, "intensity": res.intensity}
    sys.stdout.write(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    if args.output:
        out = Path(args.output)
        media_io.atomic_write_text(out, res.csv())
        media_io.write_json(out.with_suffix(".json"), doc)
        media_io.write_json(out.parent / "run.json", _echo(args))
    return 0


# -- loss --------------------------------------------------------------------

def _series(path, column=0):
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidArgument(f"{path}: not valid JSON: {exc}") from None
    if isinstance(doc, dict) and "effect" in doc:
        return parse_trajectory(text).values[:, column]
    arr = np.asarray(doc, dtype=np.float64)
    return arr if arr.ndim == 1 else arr[:, column]


def cmd_loss_ncc(args):
    res = losses.ncc(_series(args.pred, args.column), _series(args.gt, args.column))
    _write_result(args, {"loss": "ncc", "value": None if not res.valid else res.value, "valid": res.valid})
    return 0


def cmd_loss_infonce(args):
    v = losses.infonce(media_io.read_embeddings(args.anchors), media_io.read_embeddings(args.positives),
                       args.temperature)
    _write_result(args, {"loss": "infonce", "value": v})
    return 0


def cmd_loss_mi(args):
    v = losses.mi_penalty(media_io.read_embeddings(args.content), media_io.read_embeddings(args.style))
    _write_result(args, {"loss": "mi", "value": v})
    return 0


def cmd_loss_combined(args):
    parts = losses.LossParts()
    detail = {}
    if args.pred and args.gt:
        pred = _series(args.pred, args.column)
        parts.ncc = losses.ncc(pred, _series(args.gt, args.column))
        parts.aux = losses.aux_penalties(pred)
        detail["ncc"] = parts.ncc.value if parts.ncc.valid else None
        detail["ncc_valid"] = parts.ncc.valid
        detail["aux"] = parts.aux._asdict()
    if args.content_anchors and args.content_positives:
        parts.content_nce = losses.infonce(media_io.read_embeddings(args.content_anchors),
                                           media_io.read_embeddings(args.content_positives), args.temperature)
        detail["content_nce"] = parts.content_nce
    if args.style_anchors and args.style_positives:
        parts.style_nce = losses.infonce(media_io.read_embeddings(args.style_anchors),
                                         media_io.read_embeddings(args.style_positives), args.temperature)
        detail["style_nce"] = parts.style_nce
    if args.z_content and args.z_style:
        parts.mi = losses.mi_penalty(media_io.read_embeddings(args.z_content), media_io.read_embeddings(args.z_style))
        detail["mi"] = parts.mi
    weights = losses.LossWeights(
        trajectory=args.w_traj, content=args.w_content, style=args.w_style, mi=args.w_mi,
        flat=args.w_flat, smooth=args.w_smooth, range=args.w_range,
    )
    total = losses.combined_loss(parts, weights, args.effect)
    _write_result(args, {"loss": "combined", "value": total, "parts": detail})
    return 0


# -- exif --------------------------------------------------------------------

def cmd_exif_normalize(args):
    default = media_io.DEFAULT_EXIF_RANGES[args.field]
    frange = media_io.FieldRange(
        args.min if args.min is not None else default.m_min,
        args.max if args.max is not None else default.m_max,
    )
    v = media_io.exif_normalize(args.value, frange)
    _write_result(args, {"field": args.field, "value": args.value, "normalized": v,
                         "range": [frange.m_min, frange.m_max]})
    return 0


def cmd_exif_read(args):
    rec = media_io.read_exif_sidecar(Path(args.sidecar).read_text(encoding="utf-8"))
    _write_result(args, {"aperture": rec.aperture, "focal_length": rec.focal_length, "iso": rec.iso,
                         "normalized": media_io.normalize_exif_record(rec), "extra": rec.extra})
    return 0


# -- parser ------------------------------------------------------------------

def _effect(value):
    try:
        return EffectKind.parse(value).value
    except InvalidArgument as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(value):
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return n


def build_parser():
    p = argparse.ArgumentParser(prog="camforge", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"camforge {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def seeded(sp):
        sp.add_argument("--seed", type=int, default=None, help="default: $CAMFORGE_SEED or 0")

    def jobs(sp):
        sp.add_argument("--jobs", type=_positive_int, default=1, help="worker threads (output is identical)")

    # traj
    traj = sub.add_parser("traj", help="parameter trajectories").add_subparsers(dest="action", required=True)
    g = traj.add_parser("gen", help="generate a trajectory sidecar")
    g.add_argument("--effect", type=_effect, required=True)
    g.add_argument("--frames", type=int, required=True)
    seeded(g)
    g.add_argument("--no-delta", action="store_true", help="omit the delta matrix")
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_traj_gen)
    d = traj.add_parser("delta", help="print the anchor-relative deltas of a sidecar")
    d.add_argument("traj")
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_traj_delta)

    # render
    r = sub.add_parser("render", help="render a frame directory under a trajectory")
    r.add_argument("--effect", type=_effect, required=True)
    r.add_argument("--traj", required=True)
    r.add_argument("--frames", required=True, help="directory of NNNN.ppm frames")
    r.add_argument("--depth", help="directory of depth_NNNN.pfm maps")
    r.add_argument("--flow", help="directory of flow_NNNN.pfm maps")
    r.add_argument("--base-fps", type=float, default=DEFAULT_BASE_FPS)
    jobs(r)
    r.add_argument("-o", "--output", required=True)
    r.set_defaults(func=cmd_render)

    # dataset
    ds = sub.add_parser("dataset", help="training data composition").add_subparsers(dest="action", required=True)
    t = ds.add_parser("triplet", help="anchor / content / style triplet")
    t.add_argument("--scene-a", required=True)
    t.add_argument("--scene-b", required=True)
    t.add_argument("--effect", type=_effect, required=True)
    t.add_argument("--frames", type=_positive_int, help="use only the first N frames")
    t.add_argument("--base-fps", type=float, default=DEFAULT_BASE_FPS)
    seeded(t)
    jobs(t)
    t.add_argument("-o", "--output", required=True)
    t.set_defaults(func=cmd_dataset_triplet)
    i = ds.add_parser("inflate", help="still image to static pseudo-video")
    i.add_argument("--image", required=True)
    i.add_argument("--depth")
    i.add_argument("--exif", help="EXIF JSON sidecar")
    i.add_argument("--frames", type=_positive_int, default=81)
    i.add_argument("-o", "--output", required=True)
    i.set_defaults(func=cmd_dataset_inflate)
    b = ds.add_parser("batch", help="batch manifest of scene/trajectory pairs")
    b.add_argument("--scenes", nargs="+", required=True)
    b.add_argument("--videos", type=_positive_int, default=5)
    b.add_argument("--augmentations", type=_positive_int, default=6)
    b.add_argument("--effect", type=_effect, action="append")
    seeded(b)
    b.add_argument("-o", "--output", required=True)
    b.set_defaults(func=cmd_dataset_batch)
    s = ds.add_parser("scene", help="write the procedural test scene")
    s.add_argument("--height", type=_positive_int, default=480)
    s.add_argument("--width", type=_positive_int, default=832)
    s.add_argument("--frames", type=_positive_int, default=3)
    s.add_argument("--pan", type=int, default=4, help="pan in px/frame")
    seeded(s)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_dataset_scene)

    # metric
    mt = sub.add_parser("metric", help="image and embedding metrics").add_subparsers(dest="action", required=True)
    for name, fn in (("psnr", cmd_metric_psnr), ("ssim", cmd_metric_ssim)):
        m = mt.add_parser(name)
        m.add_argument("--a", required=True, help="PPM file or frame directory")
        m.add_argument("--b", required=True)
        m.add_argument("-o", "--output")
        m.set_defaults(func=fn)
    w = mt.add_parser("wclip")
    w.add_argument("--gen", required=True)
    w.add_argument("--ref", required=True)
    w.add_argument("--window", type=_positive_int, default=5)
    w.add_argument("-o", "--output")
    w.set_defaults(func=cmd_metric_wclip)
    f = mt.add_parser("fidelity")
    f.add_argument("--effect", type=_effect, required=True)
    f.add_argument("--scene", required=True)
    f.add_argument("--levels", type=int, default=10)
    f.add_argument("--focus", type=float, default=0.0, help="focus plane for bokeh sweeps")
    f.add_argument("-o", "--output", help="CSV path")
    f.set_defaults(func=cmd_metric_fidelity)

    # loss
    ls = sub.add_parser("loss", help="disentanglement losses").add_subparsers(dest="action", required=True)
    n = ls.add_parser("ncc")
    n.add_argument("--pred", required=True)
    n.add_argument("--gt", required=True)
    n.add_argument("--column", type=int, default=0)
    n.add_argument("-o", "--output")
    n.set_defaults(func=cmd_loss_ncc)
    n = ls.add_parser("infonce")
    n.add_argument("--anchors", required=True)
    n.add_argument("--positives", required=True)
    n.add_argument("--temperature", type=float, default=losses.INFONCE_TEMPERATURE)
    n.add_argument("-o", "--output")
    n.set_defaults(func=cmd_loss_infonce)
    n = ls.add_parser("mi")
    n.add_argument("--content", required=True)
    n.add_argument("--style", required=True)
    n.add_argument("-o", "--output")
    n.set_defaults(func=cmd_loss_mi)
    n = ls.add_parser("combined")
    n.add_argument("--effect", type=_effect)
    n.add_argument("--pred")
    n.add_argument("--gt")
    n.add_argument("--column", type=int, default=0)
    n.add_argument("--content-anchors")
    n.add_argument("--content-positives")
    n.add_argument("--style-anchors")
    n.add_argument("--style-positives")
    n.add_argument("--z-content")
    n.add_argument("--z-style")
    n.add_argument("--temperature", type=float, default=losses.INFONCE_TEMPERATURE)
    dw = losses.LossWeights()
    for flag, dest, val in (("--w-traj", "w_traj", dw.trajectory), ("--w-content", "w_content", dw.content),
                            ("--w-style", "w_style", dw.style), ("--w-mi", "w_mi", dw.mi),
                            ("--w-flat", "w_flat", dw.flat), ("--w-smooth", "w_smooth", dw.smooth),
                            ("--w-range", "w_range", dw.range)):
        n.add_argument(flag, dest=dest, type=float, default=val)
    n.add_argument("-o", "--output")
    n.set_defaults(func=cmd_loss_combined)

    # exif
    ex = sub.add_parser("exif", help="EXIF sidecars").add_subparsers(dest="action", required=True)
    e = ex.add_parser("normalize")
    e.add_argument("--field", choices=sorted(media_io.DEFAULT_EXIF_RANGES), required=True)
    e.add_argument("--value", type=float, required=True)
    e.add_argument("--min", type=float)
    e.add_argument("--max", type=float)
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_exif_normalize)
    e = ex.add_parser("read")
    e.add_argument("sidecar")
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_exif_read)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "seed") and args.seed is None:
            args.seed = _default_seed()
        return args.func(args)
    except (CamforgeError, OSError) as exc:
        print(f"camforge: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
