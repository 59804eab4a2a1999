import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from camforge import metrics
from camforge.errors import InvalidArgument, UndefinedCorrelation, UnsupportedEffect
from camforge.pixel_effects import apply_exposure


def naive_ssim(a, b):
    """Direct per-window evaluation, no filtering tricks."""
    ya = a @ np.array([0.299, 0.587, 0.114])
    yb = b @ np.array([0.299, 0.587, 0.114])
    x = np.arange(11) - 5.0
    g1 = np.exp(-x * x / (2 * 1.5 ** 2))
    w = np.outer(g1, g1)
    w /= w.sum()
    c1, c2 = 0.01 ** 2, 0.03 ** 2
    vals = []
    for i in range(ya.shape[0] - 10):
        for j in range(ya.shape[1] - 10):
            pa = ya[i:i + 11, j:j + 11]
            pb = yb[i:i + 11, j:j + 11]
            ma = (w * pa).sum()
            mb = (w * pb).sum()
            va = (w * (pa - ma) ** 2).sum()
            vb = (w * (pb - mb) ** 2).sum()
            cov = (w * (pa - ma) * (pb - mb)).sum()
            vals.append((2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2)))
    return float(np.mean(vals))


def brute_wclip(gen, ref, window):
    half = window // 2
    out = []
    for i in range(len(gen)):
        best = -np.inf
        for j in range(max(0, i - half), min(len(ref), i + half + 1)):
            c = gen[i] @ ref[j] / (np.linalg.norm(gen[i]) * np.linalg.norm(ref[j]))
            best = max(best, c)
        out.append(best)
    return float(np.mean(out))


# -- PSNR / SSIM ---------------------------------------------------------------

def test_psnr_examples():
    a = np.full((4, 4, 3), 0.3)
    assert metrics.psnr(a, a) == math.inf
    assert metrics.psnr(a, a + 0.1) == pytest.approx(20.0, abs=1e-9)
    assert metrics.psnr(np.zeros((2, 2, 3)), np.ones((2, 2, 3))) == 0.0


def test_psnr_shape_mismatch():
    with pytest.raises(InvalidArgument):
        metrics.psnr(np.zeros((2, 2, 3)), np.zeros((2, 3, 3)))


def test_psnr_decreases_with_noise(rng):
    a = rng.random((16, 16, 3))
    noise = rng.normal(size=a.shape)
    vals = [metrics.psnr(a, a + s * noise) for s in (0.01, 0.02, 0.05, 0.1, 0.3)]
    assert all(x > y for x, y in zip(vals, vals[1:]))


def test_ssim_identical_and_negative(rng):
    a = rng.random((20, 24, 3))
    assert metrics.ssim(a, a) == pytest.approx(1.0, abs=1e-12)
    assert metrics.ssim(a, 1.0 - a) < 1.0


def test_ssim_matches_naive(rng):
    a = rng.random((19, 23, 3))
    b = np.clip(a + 0.2 * rng.normal(size=a.shape), 0, 1)
    assert metrics.ssim(a, b) == pytest.approx(naive_ssim(a, b), abs=1e-6)
    c = rng.random(a.shape)
    assert metrics.ssim(a, c) == pytest.approx(naive_ssim(a, c), abs=1e-6)


def test_ssim_too_small():
    with pytest.raises(InvalidArgument):
        metrics.ssim(np.zeros((10, 30, 3)), np.zeros((10, 30, 3)))


# -- wCLIP ---------------------------------------------------------------------

def test_window_mapping():
    assert [metrics.window_half_width(w) for w in (1, 5, 10)] == [0, 2, 5]


@pytest.mark.parametrize("window", [1, 5, 10])
def test_wclip_self_is_one(rng, window):
    g = rng.normal(size=(12, 32))
    assert metrics.wclip(g, g, window) == 1.0


def test_wclip_shift_by_two():
    t = 10
    # distinct orthogonal vectors, last one held so the tail frames have a partner in range
    gen = np.eye(t)[np.minimum(np.arange(t), t - 3)]
    ref = gen[np.maximum(np.arange(t) - 2, 0)]
    assert metrics.wclip(gen, ref, 5) == 1.0
    assert metrics.wclip(gen, ref, 1) < 1.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 16), st.integers(1, 8))
def test_wclip_matches_brute_force_and_monotone(seed, t, d):
    r = np.random.default_rng(seed)
    g, f = r.normal(size=(t, d)), r.normal(size=(t, d))
    vals = [metrics.wclip(g, f, w) for w in (1, 5, 10)]
    for w, v in zip((1, 5, 10), vals):
        assert v == pytest.approx(brute_wclip(g, f, w), abs=1e-12)
    assert vals[0] <= vals[1] <= vals[2]


def test_wclip_scale_invariant(rng):
    g, f = rng.normal(size=(8, 6)), rng.normal(size=(8, 6))
    scale = rng.uniform(0.1, 10, size=(8, 1))
    assert metrics.wclip(g * scale, f, 5) == pytest.approx(metrics.wclip(g, f, 5), abs=1e-12)
    assert metrics.wclip(g, f / scale, 5) == pytest.approx(metrics.wclip(g, f, 5), abs=1e-12)


def test_wclip_window_direction_symmetry(rng):
    g, f = rng.normal(size=(9, 4)), rng.normal(size=(9, 4))
    assert metrics.wclip(g[::-1], f[::-1], 5) == pytest.approx(metrics.wclip(g, f, 5), abs=1e-12)


def test_wclip_zero_vector_excluded(rng):
    g, f = rng.normal(size=(6, 4)), rng.normal(size=(6, 4))
    g[3] = 0
    rep = metrics.wclip_report(g, f, 1)
    assert rep.excluded == 1 and rep.excluded_frames == [3]
    with pytest.warns(RuntimeWarning):
        v = metrics.wclip(g, f, 1)
    keep = [i for i in range(6) if i != 3]
    assert v == pytest.approx(brute_wclip(g[keep], f[keep], 1), abs=1e-12)


def test_wclip_bad_input(rng):
    with pytest.raises(InvalidArgument):
        metrics.wclip(rng.normal(size=(4, 3)), rng.normal(size=(5, 3)))
    with pytest.raises(InvalidArgument):
        metrics.wclip(rng.normal(size=(4, 3)), rng.normal(size=(4, 3)), 0)


# -- fidelity proxies ----------------------------------------------------------

def test_proxy_examples():
    black = np.zeros((12, 12, 3))
    white = np.ones((12, 12, 3))
    assert metrics.proxy_signal("exposure", [black, black]).signal == [0.0, 0.0]
    assert metrics.proxy_signal("temperature", [white]).signal == [1.0]
    assert metrics.proxy_signal("bokeh", [np.full((12, 12, 3), 0.4)]).signal[0] == pytest.approx(1e6)
    assert metrics.proxy_signal("zoom", [white]).signal == [0.0]


def test_proxy_edge_density_step():
    f = np.zeros((10, 10, 3))
    f[:, 5:] = 1.0
    # columns 4 and 5 straddle the step
    assert metrics.edge_density(f) == pytest.approx(0.2)


@pytest.mark.parametrize("effect", ["shutter", "fisheye"])
def test_proxy_unsupported(effect):
    with pytest.raises(UnsupportedEffect):
        metrics.proxy_signal(effect, [np.zeros((4, 4, 3))])


def test_proxy_exposure_increasing(rng):
    frame = 0.05 + 0.6 * rng.random((16, 16, 3))
    sig = metrics.proxy_signal("exposure", [apply_exposure(frame, ev) for ev in np.linspace(-3, 1, 9)]).signal
    assert all(x < y for x, y in zip(sig, sig[1:]))


def test_pearson_examples():
    x = np.arange(6.0)
    assert metrics.pearson_r(x, 2 * x + 3) == pytest.approx(1.0, abs=1e-15)
    assert metrics.pearson_r(x, -x) == pytest.approx(-1.0, abs=1e-15)
    assert metrics.pearson_r([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5, abs=1e-15)


def test_pearson_errors():
    with pytest.raises(UndefinedCorrelation):
        metrics.pearson_r([1, 2, 3], [2, 2, 2])
    with pytest.raises(InvalidArgument):
        metrics.pearson_r([1], [1])


def test_metric_json_inf():
    rec = metrics.metric_json("psnr", math.inf, [math.inf, 30.0])
    assert rec == {"metric": "psnr", "value": "inf", "per_frame": ["inf", 30.0]}
