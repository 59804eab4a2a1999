"""Reference implementations of the disentanglement training losses.

These are plain numpy functions meant as oracles for a training harness;
they compute values only, no gradients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import NamedTuple, Optional

import numpy as np

from .errors import InvalidArgument
from .trajectory import EffectKind

NCC_MIN_GT_STD = 1e-3
INFONCE_TEMPERATURE = 0.07


class NCCResult(NamedTuple):
    value: float
    valid: bool


def ncc(pred, gt):
    """Normalised cross-correlation of two series (population statistics).

    The result is flagged invalid when the ground truth is (nearly) flat,
    i.e. its standard deviation is at most 1e-3. A flat prediction against a
    valid ground truth scores 0.
    """
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape or pred.ndim != 1:
        raise InvalidArgument(f"ncc needs equal-length 1-D series, got {pred.shape} and {gt.shape}")
    if pred.size < 2:
        raise InvalidArgument("ncc needs at least 2 samples")
    gstd = float(gt.std())
    if gstd <= NCC_MIN_GT_STD:
        return NCCResult(math.nan, False)
    pstd = float(pred.std())
    if pstd == 0:
        return NCCResult(0.0, True)
    zp = (pred - pred.mean()) / pstd
    zg = (gt - gt.mean()) / gstd
    return NCCResult(float(np.clip(np.mean(zp * zg), -1.0, 1.0)), True)


def _unit_rows(x, name):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2:
        raise InvalidArgument(f"{name} must be an N x d matrix, got shape {x.shape}")
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0):
        raise InvalidArgument(f"{name} contains a zero vector")
    return x / norms[:, None]


def _logsumexp(row):
    m = row.max()
    return m + math.log(math.fsum(np.exp(row - m)))


def infonce(anchors, positives, temperature=INFONCE_TEMPERATURE):
    """Single-direction InfoNCE with in-batch negatives.

    Row ``i`` of ``positives`` is the positive for anchor ``i``; every other
    row serves as a negative.
    """
    if not temperature > 0:
        raise InvalidArgument(f"temperature must be positive, got {temperature}")
    a = _unit_rows(anchors, "anchors")
    p = _unit_rows(positives, "positives")
    if a.shape != p.shape:
        raise InvalidArgument(f"anchors {a.shape} and positives {p.shape} differ in shape")
    n = a.shape[0]
    if n < 2:
        raise InvalidArgument("infonce needs a batch of at least 2")
    logits = (a @ p.T) / temperature
    terms = [_logsumexp(logits[i]) - logits[i, i] for i in range(n)]
    return max(0.0, math.fsum(terms) / n)


def mi_penalty(z_content, z_style):
    """Mean squared cosine between matched content and style embeddings."""
    c = _unit_rows(z_content, "z_content")
    s = _unit_rows(z_style, "z_style")
    if c.shape != s.shape:
        raise InvalidArgument(f"z_content {c.shape} and z_style {s.shape} differ in shape")
    cos = np.clip(np.sum(c * s, axis=1), -1.0, 1.0)
    return float(np.mean(cos * cos))


class AuxPenalties(NamedTuple):
    flat: float
    smooth: float
    range: float


def aux_penalties(pred):
    """Regularisers on a predicted trajectory.

    flat   -- ``max(0, 1 - var)``, discourages collapsed predictions
    smooth -- mean squared first difference
    range  -- mean of ``relu(|z| - 3)**2`` over z-scored samples
    """
    pred = np.asarray(pred, dtype=np.float64)
    if pred.ndim != 1 or pred.size < 2:
        raise InvalidArgument("aux_penalties needs a 1-D series of length >= 2")
    var = float(pred.var())
    flat = max(0.0, 1.0 - var)
    smooth = float(np.mean(np.diff(pred) ** 2))
    std = math.sqrt(var)
    if std == 0:
        rng = 0.0
    else:
        z = np.abs((pred - pred.mean()) / std)
        rng = float(np.mean(np.maximum(z - 3.0, 0.0) ** 2))
    return AuxPenalties(flat, smooth, rng)


@dataclass(frozen=True)
class LossWeights:
    trajectory: float = 2.0
    content: float = 0.1
    style: float = 0.3
    mi: float = 0.05
    flat: float = 0.1
    smooth: float = 0.005
    range: float = 0.05

    @classmethod
    def zeros(cls):
        return cls(**{f.name: 0.0 for f in fields(cls)})


@dataclass
class LossParts:
    ncc: Optional[NCCResult] = None
    content_nce: float = 0.0
    style_nce: float = 0.0
    mi: float = 0.0
    aux: Optional[AuxPenalties] = None


# mutually exclusive rendering modes make the flat penalty fight the NCC term
_NO_AUX = {EffectKind.BOKEH, EffectKind.SHUTTER}


def combined_loss(parts, weights=None, effect=None):
    w = weights or LossWeights()
    terms = []
    if parts.ncc is not None and parts.ncc.valid:
        terms.append(w.trajectory * (1.0 - parts.ncc.value))
    terms += [w.content * parts.content_nce, w.style * parts.style_nce, w.mi * parts.mi]
    use_aux = effect is None or EffectKind.parse(effect) not in _NO_AUX
    if parts.aux is not None and use_aux:
        terms += [w.flat * parts.aux.flat, w.smooth * parts.aux.smooth, w.range * parts.aux.range]
    total = math.fsum(terms)
    if not math.isfinite(total):
        raise InvalidArgument("loss components must be finite")
    return total
