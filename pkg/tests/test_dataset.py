import json

import numpy as np
import pytest

from camforge import dataset, media_io
from camforge.errors import DependencyError, InvalidArgument
from camforge.scene import Scene


def tree_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def sidecar(root, role):
    return json.loads((root / role / "meta.json").read_text())


@pytest.fixture(scope="module")
def exposure_dir(tmp_path_factory, small_scene, other_scene):
    root = tmp_path_factory.mktemp("trip")
    dataset.write_triplet(dataset.build_triplet(small_scene, other_scene, "exposure", 7), root)
    return root


def test_triplet_invariants_from_sidecars(exposure_dir):
    a, c, s = (sidecar(exposure_dir, r) for r in dataset.ROLES)
    assert a["trajectory"]["values"] == s["trajectory"]["values"]
    assert a["scene"] == c["scene"] != s["scene"]
    va, vc = np.array(a["trajectory"]["values"]), np.array(c["trajectory"]["values"])
    assert np.max(np.abs(va - vc)) > 1e-6
    assert a["seed"] == 7 and c["seed"] == 8


def test_triplet_layout(exposure_dir, small_scene):
    n = len(small_scene)
    for role in dataset.ROLES:
        assert len(list((exposure_dir / role / "frames").glob("*.ppm"))) == n
        assert len(list((exposure_dir / role / "maps").glob("depth_*.pfm"))) == n
        assert len(list((exposure_dir / role / "maps").glob("flow_*.pfm"))) == n
    manifest = json.loads((exposure_dir / "manifest.json").read_text())
    assert [m["role"] for m in manifest] == list(dataset.ROLES)


def test_triplet_exported_maps_normalised(exposure_dir):
    d = media_io.read_pfm(exposure_dir / "anchor" / "maps" / "depth_0000.pfm")
    assert d.min() == 0.0 and d.max() == 1.0
    fl = media_io.read_pfm(exposure_dir / "anchor" / "maps" / "flow_0000.pfm")
    assert fl.shape[-1] == 2


def test_triplet_style_clip_is_anchor_trajectory_on_scene_b(exposure_dir, other_scene):
    from camforge.pixel_effects import apply_exposure

    ev = sidecar(exposure_dir, "style")["trajectory"]["values"][0][0]
    expected = apply_exposure(other_scene.frames[0], ev)
    got = media_io.read_ppm(exposure_dir / "style" / "frames" / "0000.ppm")
    assert np.max(np.abs(got - expected)) <= 0.5 / 255 + 1e-9


@pytest.mark.parametrize("effect", ["exposure", "shutter", "bokeh"])
def test_triplet_deterministic(tmp_path, small_scene, other_scene, effect):
    for name, jobs in (("a", 1), ("b", 1), ("c", 4)):
        dataset.write_triplet(dataset.build_triplet(small_scene, other_scene, effect, 3, jobs=jobs), tmp_path / name)
    assert tree_bytes(tmp_path / "a") == tree_bytes(tmp_path / "b") == tree_bytes(tmp_path / "c")


def test_bokeh_needs_depth(small_scene, other_scene):
    bare = Scene("bare", small_scene.frames, None, small_scene.flow)
    with pytest.raises(DependencyError) as info:
        dataset.build_triplet(bare, other_scene, "bokeh", 0)
    assert info.value.missing == "depth" and "depth" in str(info.value)


def test_shutter_needs_flow(small_scene, other_scene):
    bare = Scene("bare", small_scene.frames, small_scene.depth, None)
    with pytest.raises(DependencyError) as info:
        dataset.build_triplet(small_scene, bare, "shutter", 0)
    assert info.value.missing == "flow"


def test_triplet_frame_count_mismatch(small_scene, other_scene):
    short = Scene("short", other_scene.frames[:2], other_scene.depth[:2], other_scene.flow[:2])
    with pytest.raises(InvalidArgument):
        dataset.build_triplet(small_scene, short, "exposure", 0)


def test_distinct_trajectory_retries(monkeypatch):
    from camforge import trajectory as tr

    ref = tr.gen_trajectory("exposure", 5, 0)
    with pytest.raises(InvalidArgument):
        monkeypatch.setattr(dataset, "gen_trajectory", lambda e, n, s: ref)
        dataset.distinct_trajectory("exposure", 5, ref, 1)


# -- still inflation -------------------------------------------------------------

def test_inflate_81(rng):
    img = rng.random((6, 5, 3))
    clip = dataset.inflate_still(img)
    assert len(clip.frames) == 81
    assert all(np.array_equal(f, img) for f in clip.frames)
    assert all(not f.any() for f in clip.flow)
    assert all(p.shape == (6, 5, 4) and not p.any() for p in clip.perspective)
    assert clip.depth is None


def test_inflate_single_with_depth(rng):
    depth = rng.random((6, 5))
    clip = dataset.inflate_still(rng.random((6, 5, 3)), 1, depth)
    assert len(clip.frames) == 1 and np.array_equal(clip.depth[0], depth)


def test_inflate_bad_count(rng):
    with pytest.raises(InvalidArgument):
        dataset.inflate_still(rng.random((2, 2, 3)), 0)


def test_write_still_clip_zero_maps(tmp_path, rng):
    clip = dataset.inflate_still(rng.random((4, 4, 3)), 3)
    dataset.write_still_clip(clip, tmp_path, {"frames": 3})
    assert not media_io.read_pfm(tmp_path / "maps" / "flow_0002.pfm").any()
    assert media_io.read_pfm(tmp_path / "maps" / "persp_0000.pfm").shape == (4, 4, 4)


# -- batches ---------------------------------------------------------------------

SCENES = [f"scene{i}" for i in range(8)]


def test_batch_defaults():
    entries = dataset.compose_batch(dataset.BatchSpec(), SCENES, 0)
    assert len(entries) == 30
    assert len({e["scene"] for e in entries}) == 5
    assert all(set(e) == {"scene", "effect", "seed", "role"} for e in entries)


def test_batch_small_and_deterministic():
    assert len(dataset.compose_batch(dataset.BatchSpec(1, 1), SCENES, 4)) == 1
    assert dataset.compose_batch(dataset.BatchSpec(), SCENES, 9) == dataset.compose_batch(dataset.BatchSpec(), SCENES, 9)
    assert dataset.compose_batch(dataset.BatchSpec(), SCENES, 9) != dataset.compose_batch(dataset.BatchSpec(), SCENES, 10)


def test_batch_effect_filter():
    entries = dataset.compose_batch(dataset.BatchSpec(), SCENES, 0, ["zoom"])
    assert {e["effect"] for e in entries} == {"zoom"}


def test_batch_insufficient_scenes():
    with pytest.raises(InvalidArgument):
        dataset.compose_batch(dataset.BatchSpec(), SCENES[:4], 0)
