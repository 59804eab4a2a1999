"""Deterministic synthetic-camera effects, dataset composition and evaluation."""

__version__ = "0.1.0"

from .errors import CamforgeError  # noqa: E402
from .kernels import BACKEND  # noqa: E402
from .trajectory import EffectKind, Trajectory, gen_trajectory  # noqa: E402

__all__ = ["BACKEND", "CamforgeError", "EffectKind", "Trajectory", "gen_trajectory", "__version__"]
