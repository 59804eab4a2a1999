"""Readers and writers for frames, float maps, embeddings and JSON sidecars.

Formats:

* PPM ``P6`` with maxval 255 for display frames.
* PFM ``Pf`` (1 channel) / ``PF`` (3 channels), little-endian (negative
  scale), rows stored bottom-up on disk and top-down in memory.
* Maps with 2 or more than 3 channels are written as one ``Pf`` file whose
  height holds the channel planes stacked top to bottom, plus a JSON sidecar
  ``{"channels": n, "width": w, "height": h}`` next to it (same stem,
  ``.json`` suffix).
* Embedding sequences: a ``Pf`` of width ``dim`` and height ``frames`` plus a
  sidecar ``{"frames": T, "dim": d}``.
"""

from __future__ import annotations

import json
import math
import os
import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, FormatError, InvalidArgument, ParseError, RangeError

_TOKEN = re.compile(rb"\s*(#[^\n]*\n\s*)*(\S+)")


def atomic_write_bytes(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text):
    atomic_write_bytes(path, text.encode("utf-8"))


def write_json(path, doc):
    atomic_write_text(path, json.dumps(doc, indent=1, sort_keys=True) + "\n")


# -- PPM ---------------------------------------------------------------------

def decode_ppm(data):
    data = bytes(data)
    if data[:2] != b"P6":
        raise FormatError(f"bad PPM magic {data[:2]!r}, expected b'P6'", offset=0)
    pos = 2
    fields = []
    for name in ("width", "height", "maxval"):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise FormatError(f"PPM header truncated before {name}", offset=pos)
        tok = m.group(2)
        if not tok.isdigit():
            raise FormatError(f"PPM {name} is not a decimal integer: {tok!r}", offset=m.start(2))
        fields.append(int(tok))
        pos = m.end(2)
    width, height, maxval = fields
    if maxval != 255:
        raise FormatError(f"PPM maxval must be 255, got {maxval}", offset=pos)
    if width < 1 or height < 1:
        raise FormatError(f"PPM size {width}x{height} is empty", offset=pos)
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise FormatError("PPM header must end with one whitespace byte", offset=pos)
    pos += 1
    need = width * height * 3
    payload = data[pos:pos + need]
    if len(payload) < need:
        raise FormatError(f"PPM payload truncated: need {need} bytes, have {len(payload)}", offset=pos + len(payload))
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3)
    return pixels.astype(np.float64) / 255.0


def encode_ppm(frame):
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise InvalidArgument(f"PPM needs an H x W x 3 frame, got {frame.shape}")
    if not np.all(np.isfinite(frame)):
        raise DataError("frame contains non-finite values")
    # round half away from zero; inputs are non-negative after clipping
    q = np.floor(np.clip(frame, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    h, w = frame.shape[:2]
    return f"P6\n{w} {h}\n255\n".encode("ascii") + q.tobytes()


def read_ppm(path):
    return decode_ppm(Path(path).read_bytes())


def write_ppm(path, frame):
    atomic_write_bytes(path, encode_ppm(frame))


# -- PFM ---------------------------------------------------------------------

def decode_pfm(data):
    """Parse a PFM byte string into a top-down float32 array (H x W or H x W x 3)."""
    data = bytes(data)
    magic = data[:2]
    if magic not in (b"Pf", b"PF"):
        raise FormatError(f"bad PFM magic {magic!r}", offset=0)
    channels = 1 if magic == b"Pf" else 3
    pos = 2
    tokens = []
    for name in ("width", "height", "scale"):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise FormatError(f"PFM header truncated before {name}", offset=pos)
        tokens.append((m.group(2), m.start(2)))
        pos = m.end(2)
    try:
        width, height = int(tokens[0][0]), int(tokens[1][0])
    except ValueError:
        raise FormatError("PFM width/height are not integers", offset=tokens[0][1]) from None
    try:
        scale = float(tokens[2][0])
    except ValueError:
        raise FormatError(f"PFM scale is not a number: {tokens[2][0]!r}", offset=tokens[2][1]) from None
    if not scale < 0:
        raise FormatError(f"PFM scale {scale} declares big-endian data; only little-endian is supported",
                          offset=tokens[2][1])
    if width < 1 or height < 1:
        raise FormatError(f"PFM size {width}x{height} is empty", offset=tokens[0][1])
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise FormatError("PFM header must end with one whitespace byte", offset=pos)
    pos += 1
    need = width * height * channels * 4
    payload = data[pos:pos + need]
    if len(payload) < need:
        raise FormatError(f"PFM payload truncated: need {need} bytes, have {len(payload)}", offset=pos + len(payload))
    arr = np.frombuffer(payload, dtype="<f4").reshape(height, width, channels)[::-1]
    if not np.all(np.isfinite(arr)):
        raise DataError("PFM payload contains non-finite values")
    arr = arr.astype(np.float32)
    return arr[..., 0] if channels == 1 else arr


def encode_pfm(arr):
    arr = np.asarray(arr)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[..., 0]
    if arr.ndim == 2:
        magic, h, w = b"Pf", arr.shape[0], arr.shape[1]
    elif arr.ndim == 3 and arr.shape[2] == 3:
        magic, h, w = b"PF", arr.shape[0], arr.shape[1]
    else:
        raise InvalidArgument(f"plain PFM holds 1 or 3 channels, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError("map contains non-finite values")
    body = np.ascontiguousarray(arr[::-1], dtype="<f4").tobytes()
    return magic + f"\n{w} {h}\n-1.0\n".encode("ascii") + body


def _sidecar_path(path):
    return Path(path).with_suffix(".json")


def _read_sidecar(path):
    side = _sidecar_path(path)
    if not side.exists():
        return None
    try:
        doc = json.loads(side.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{side}: invalid JSON sidecar: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{side}: sidecar must be a JSON object")
    return doc


def write_pfm(path, arr):
    """Write a map; 2-channel or >3-channel maps become stacked planes + sidecar."""
    arr = np.asarray(arr)
    if arr.ndim == 3 and arr.shape[2] not in (1, 3):
        h, w, n = arr.shape
        planes = np.concatenate([arr[..., c] for c in range(n)], axis=0)
        atomic_write_bytes(path, encode_pfm(planes))
        write_json(_sidecar_path(path), {"channels": n, "width": w, "height": h})
    else:
        atomic_write_bytes(path, encode_pfm(arr))


def read_pfm(path):
    arr = decode_pfm(Path(path).read_bytes())
    side = _read_sidecar(path)
    if side is None or "channels" not in side:
        return arr
    try:
        n, w, h = int(side["channels"]), int(side["width"]), int(side["height"])
    except (KeyError, TypeError, ValueError):
        raise FormatError(f"{_sidecar_path(path)}: sidecar needs integer channels/width/height") from None
    if arr.ndim != 2 or arr.shape != (n * h, w):
        raise FormatError(f"{path}: payload {arr.shape} does not hold {n} planes of {h}x{w}")
    return np.stack([arr[c * h:(c + 1) * h] for c in range(n)], axis=-1)


# -- embeddings --------------------------------------------------------------

def write_embeddings(path, seq):
    seq = np.asarray(seq, dtype=np.float32)
    if seq.ndim != 2 or seq.shape[1] < 1 or seq.shape[0] < 1:
        raise InvalidArgument(f"embeddings must be a T x d matrix with d >= 1, got {seq.shape}")
    atomic_write_bytes(path, encode_pfm(seq))
    write_json(_sidecar_path(path), {"frames": seq.shape[0], "dim": seq.shape[1]})


def read_embeddings(path):
    arr = decode_pfm(Path(path).read_bytes())
    if arr.ndim != 2:
        raise FormatError(f"{path}: embedding payload must be single-channel")
    side = _read_sidecar(path)
    if side is None:
        raise FormatError(f"{path}: missing embedding sidecar {_sidecar_path(path).name}")
    try:
        frames, dim = int(side["frames"]), int(side["dim"])
    except (KeyError, TypeError, ValueError):
        raise FormatError(f"{_sidecar_path(path)}: sidecar needs integer 'frames' and 'dim'") from None
    if arr.shape != (frames, dim):
        raise FormatError(f"{path}: sidecar claims {frames}x{dim} but payload is {arr.shape[0]}x{arr.shape[1]}")
    return arr


# -- EXIF --------------------------------------------------------------------

_EXIF_KEYS = {"aperture": "aperture", "fnumber": "aperture", "focallength": "focal_length", "iso": "iso",
              "isospeedratings": "iso"}


@dataclass
class ExifRecord:
    aperture: float = 0.0
    focal_length: float = 0.0
    iso: float = 0.0
    extra: dict = field(default_factory=dict)

    def vector(self):
        return [self.aperture, self.focal_length, self.iso]


@dataclass(frozen=True)
class FieldRange:
    m_min: float
    m_max: float

    def __post_init__(self):
        if not 0 < self.m_min < self.m_max:
            raise InvalidArgument(f"field range needs 0 < min < max, got [{self.m_min}, {self.m_max}]")


DEFAULT_EXIF_RANGES = {
    "aperture": FieldRange(1.4, 22.0),
    "focal_length": FieldRange(18.0, 200.0),
    "iso": FieldRange(100.0, 12800.0),
}


def _exif_number(key, value):
    if isinstance(value, bool):
        raise ParseError(f"EXIF field {key!r} is a boolean", field=key)
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:  # rational, e.g. "28/10"
            num, _, den = text.partition("/")
            try:
                return float(num) / float(den)
            except (ValueError, ZeroDivisionError):
                pass
        try:
            return float(text)
        except ValueError:
            pass
    raise ParseError(f"EXIF field {key!r} is not numeric: {value!r}", field=key)


def read_exif_sidecar(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"EXIF sidecar is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("EXIF sidecar must be a JSON object")
    rec = ExifRecord()
    for key, value in doc.items():
        attr = _EXIF_KEYS.get(key.replace("_", "").replace(" ", "").lower())
        if attr is None:
            rec.extra[key] = value if isinstance(value, str) else json.dumps(value)
        elif value is not None:
            setattr(rec, attr, _exif_number(key, value))
    return rec


def exif_normalize(value, frange):
    """Log-space map of ``value`` onto [0, 1] so that equal ratios give equal steps."""
    if not value > 0:
        raise InvalidArgument(f"EXIF value must be positive, got {value}")
    if not frange.m_min <= value <= frange.m_max:
        raise RangeError(f"EXIF value {value} outside [{frange.m_min}, {frange.m_max}]")
    if value == frange.m_max:
        return 1.0
    return math.log(value / frange.m_min) / math.log(frange.m_max / frange.m_min)


def normalize_exif_record(rec, ranges=None):
    """Normalised vector for (aperture, focal_length, iso); missing fields stay 0."""
    ranges = ranges or DEFAULT_EXIF_RANGES
    out = []
    for name in ("aperture", "focal_length", "iso"):
        v = getattr(rec, name)
        if v == 0:
            out.append(0.0)
        else:
            fr = ranges[name]
            out.append(exif_normalize(min(max(v, fr.m_min), fr.m_max), fr))
    return out


# -- directories of frames / maps --------------------------------------------

def list_numbered(directory, suffix, prefix=""):
    directory = Path(directory)
    return sorted(p for p in directory.glob(f"{prefix}*{suffix}") if p.is_file())


def read_frames(directory):
    paths = list_numbered(directory, ".ppm")
    if not paths:
        raise InvalidArgument(f"no .ppm frames in {directory}")
    return [read_ppm(p) for p in paths]


def read_maps(directory, prefix=""):
    paths = list_numbered(directory, ".pfm", prefix)
    if not paths:
        raise InvalidArgument(f"no {prefix}*.pfm maps in {directory}")
    return [read_pfm(p).astype(np.float64) for p in paths]
