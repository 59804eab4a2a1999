import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from camforge import media_io as mio
from camforge.errors import DataError, FormatError, InvalidArgument, ParseError, RangeError

finite32 = st.floats(-1e6, 1e6, width=32, allow_nan=False, allow_infinity=False)


# -- PPM -----------------------------------------------------------------------

def test_ppm_single_red_pixel():
    data = b"P6\n1 1\n255\n" + bytes([255, 0, 0])
    np.testing.assert_array_equal(mio.decode_ppm(data), [[[1.0, 0.0, 0.0]]])


def test_ppm_header_comments():
    data = b"P6 # made by hand\n2 1\n# max\n255\n" + bytes(range(6))
    assert mio.decode_ppm(data).shape == (1, 2, 3)


@settings(max_examples=50)
@given(hnp.arrays(np.uint8, hnp.array_shapes(min_dims=3, max_dims=3, min_side=1, max_side=9).map(
    lambda s: (s[0], s[1], 3))))
def test_ppm_round_trip(pixels):
    data = b"P6\n%d %d\n255\n" % (pixels.shape[1], pixels.shape[0]) + pixels.tobytes()
    frame = mio.decode_ppm(data)
    assert mio.encode_ppm(frame) == data


def test_ppm_rounds_half_away_from_zero():
    f = np.array([[[0.5 / 255, 1.5 / 255, 254.5 / 255]]])
    assert mio.encode_ppm(f)[-3:] == bytes([1, 2, 255])


@pytest.mark.parametrize(
    "data, offset",
    [
        (b"P5\n1 1\n255\n\x00", 0),
        (b"P6\n1 1\n65535\n\x00\x00", None),
        (b"P6\n2 2\n255\n\x00\x00\x00", 14),
        (b"P6\n2", None),
        (b"P6\nx 2\n255\n", 3),
    ],
)
def test_ppm_format_errors(data, offset):
    with pytest.raises(FormatError) as info:
        mio.decode_ppm(data)
    if offset is not None:
        assert info.value.offset == offset
        assert "offset" in str(info.value)


def test_ppm_file_round_trip(tmp_path, rng):
    f = np.floor(rng.random((5, 7, 3)) * 255 + 0.5) / 255
    mio.write_ppm(tmp_path / "a.ppm", f)
    np.testing.assert_array_equal(mio.read_ppm(tmp_path / "a.ppm"), f)


# -- PFM -----------------------------------------------------------------------

@settings(max_examples=50)
@given(hnp.arrays(np.float32, hnp.array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=8), elements=finite32))
def test_pfm_gray_round_trip(arr):
    back = mio.decode_pfm(mio.encode_pfm(arr))
    assert back.dtype == np.float32 and back.tobytes() == arr.tobytes()


def test_pfm_color_round_trip(rng):
    arr = rng.normal(size=(4, 5, 3)).astype(np.float32)
    assert mio.decode_pfm(mio.encode_pfm(arr)).tobytes() == arr.tobytes()


def test_pfm_bottom_up_on_disk():
    arr = np.array([[1.0], [2.0]], dtype=np.float32)  # top row 1, bottom row 2
    data = mio.encode_pfm(arr)
    assert data.startswith(b"Pf\n1 2\n-1.0\n")
    assert np.frombuffer(data[-8:], "<f4").tolist() == [2.0, 1.0]


def test_pfm_two_channel_stacked(tmp_path, rng):
    flow = rng.normal(size=(6, 5, 2)).astype(np.float32)
    mio.write_pfm(tmp_path / "flow.pfm", flow)
    assert (tmp_path / "flow.pfm").read_bytes().startswith(b"Pf\n5 12\n")
    assert json.loads((tmp_path / "flow.json").read_text()) == {"channels": 2, "height": 6, "width": 5}
    back = mio.read_pfm(tmp_path / "flow.pfm")
    assert back.shape == (6, 5, 2) and back.tobytes() == flow.tobytes()


@pytest.mark.parametrize("n", [4, 7])
def test_pfm_many_channels(tmp_path, rng, n):
    arr = rng.normal(size=(3, 4, n)).astype(np.float32)
    mio.write_pfm(tmp_path / "m.pfm", arr)
    assert mio.read_pfm(tmp_path / "m.pfm").tobytes() == arr.tobytes()


def test_pfm_big_endian_rejected():
    data = b"Pf\n1 1\n1.0\n" + np.float32(1).astype(">f4").tobytes()
    with pytest.raises(FormatError, match="big-endian"):
        mio.decode_pfm(data)


def test_pfm_nan_rejected():
    data = b"Pf\n2 1\n-1.0\n" + np.array([1.0, np.nan], "<f4").tobytes()
    with pytest.raises(DataError):
        mio.decode_pfm(data)


def test_pfm_truncated():
    with pytest.raises(FormatError) as info:
        mio.decode_pfm(b"PF\n2 2\n-1.0\n" + b"\x00" * 10)
    assert info.value.offset is not None


def test_pfm_stacked_sidecar_mismatch(tmp_path):
    mio.write_pfm(tmp_path / "f.pfm", np.zeros((4, 3, 2), np.float32))
    (tmp_path / "f.json").write_text(json.dumps({"channels": 3, "width": 3, "height": 4}))
    with pytest.raises(FormatError):
        mio.read_pfm(tmp_path / "f.pfm")


# -- embeddings ----------------------------------------------------------------

def test_embeddings_round_trip(tmp_path, rng):
    seq = rng.normal(size=(16, 512)).astype(np.float32)
    mio.write_embeddings(tmp_path / "e.pfm", seq)
    assert mio.read_embeddings(tmp_path / "e.pfm").tobytes() == seq.tobytes()
    assert json.loads((tmp_path / "e.json").read_text()) == {"dim": 512, "frames": 16}


def test_embeddings_dim_one(tmp_path):
    mio.write_embeddings(tmp_path / "e.pfm", np.arange(5, dtype=np.float32)[:, None])
    assert mio.read_embeddings(tmp_path / "e.pfm").shape == (5, 1)


def test_embeddings_size_mismatch(tmp_path, rng):
    mio.write_embeddings(tmp_path / "e.pfm", rng.normal(size=(15, 8)))
    (tmp_path / "e.json").write_text(json.dumps({"frames": 16, "dim": 8}))
    with pytest.raises(FormatError, match="16"):
        mio.read_embeddings(tmp_path / "e.pfm")


def test_embeddings_missing_sidecar(tmp_path):
    (tmp_path / "e.pfm").write_bytes(mio.encode_pfm(np.zeros((2, 2), np.float32)))
    with pytest.raises(FormatError):
        mio.read_embeddings(tmp_path / "e.pfm")


# -- EXIF ----------------------------------------------------------------------

@pytest.mark.parametrize(
    "text, expected",
    [
        ('{"Aperture": "2.8"}', [2.8, 0, 0]),
        ('{"FocalLength": 50, "ISO": 400}', [0, 50, 400]),
        ("{}", [0, 0, 0]),
        ('{"aperture": 4, "focallength": "35", "iso": "100"}', [4, 35, 100]),
        ('{"FNumber": "28/10", "ISOSpeedRatings": 800}', [2.8, 0, 800]),
    ],
)
def test_exif_sidecar(text, expected):
    rec = mio.read_exif_sidecar(text)
    np.testing.assert_allclose(rec.vector(), expected)


def test_exif_extra_fields_kept():
    rec = mio.read_exif_sidecar('{"Model": "X100", "ExposureTime": 0.01}')
    assert rec.extra == {"Model": "X100", "ExposureTime": "0.01"}


@pytest.mark.parametrize("text", ["{", "[1, 2]", '{"ISO": "fast"}'])
def test_exif_sidecar_errors(text):
    with pytest.raises(ParseError):
        mio.read_exif_sidecar(text)


def test_exif_normalize_examples():
    fr = mio.FieldRange(1.4, 22.0)
    assert mio.exif_normalize(1.4, fr) == 0.0
    assert mio.exif_normalize(22.0, fr) == 1.0
    assert mio.exif_normalize(2.8, fr) == pytest.approx(math.log(2) / math.log(22 / 1.4), abs=1e-15)
    assert mio.exif_normalize(2.8, fr) == pytest.approx(0.2516, abs=1e-3)


def test_exif_normalize_errors():
    fr = mio.FieldRange(1.4, 22.0)
    with pytest.raises(RangeError):
        mio.exif_normalize(32.0, fr)
    with pytest.raises(InvalidArgument):
        mio.exif_normalize(0.0, fr)
    with pytest.raises(InvalidArgument):
        mio.FieldRange(2.0, 1.0)


def test_exif_fstop_steps_equal():
    fr = mio.FieldRange(1.4, 22.0)
    stops = [1.4 * math.sqrt(2) ** k for k in range(8)]
    vals = [mio.exif_normalize(v, fr) for v in stops]
    np.testing.assert_allclose(np.diff(vals), np.diff(vals)[0], atol=1e-9)


@given(st.floats(1.4, 22.0), st.floats(1.4, 22.0))
def test_exif_strictly_increasing(a, b):
    fr = mio.FieldRange(1.4, 22.0)
    if a < b:
        assert mio.exif_normalize(a, fr) < mio.exif_normalize(b, fr)


def test_normalize_record_fill_zero():
    rec = mio.read_exif_sidecar('{"ISO": 100}')
    assert mio.normalize_exif_record(rec) == [0.0, 0.0, 0.0]
    rec = mio.read_exif_sidecar('{"ISO": 12800, "Aperture": 22}')
    assert mio.normalize_exif_record(rec) == [1.0, 0.0, 1.0]
