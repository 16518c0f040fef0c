"""Linear two-shot compositing: out = alpha * B + (1 - alpha) * F."""
from __future__ import annotations

import numpy as np

from ..core.types import DomainError, ShapeError
from .schedules import AlphaSchedule


def composite(b: np.ndarray, f: np.ndarray, alpha) -> np.ndarray:
    """Mix previous-shot frame B over next-shot frame F.

    alpha is a scalar or an (H, W) matte in [0, 1]; the blend is computed in
    float and rounded to the nearest 8-bit value.
    """
    if b.shape != f.shape:
        raise ShapeError(f"frame shapes differ: {b.shape} vs {f.shape}")
    if isinstance(alpha, np.ndarray):
        if alpha.shape != b.shape[:2]:
            raise ShapeError(f"matte shape {alpha.shape} does not match frame {b.shape[:2]}")
        if alpha.min() < 0.0 or alpha.max() > 1.0:
            raise DomainError("matte values outside [0, 1]")
        a = alpha.astype(np.float64)[..., None]
    else:
        a = float(alpha)
        if not 0.0 <= a <= 1.0:
            raise DomainError(f"alpha {alpha} outside [0, 1]")
    mixed = a * b.astype(np.float64) + (1.0 - a) * f.astype(np.float64)
    return np.rint(mixed).astype(np.uint8)


def composite_clip(b_clip: np.ndarray, f_clip: np.ndarray, schedule: AlphaSchedule) -> np.ndarray:
    """Apply a 16-frame alpha schedule to two aligned clips (T, H, W, 3)."""
    if b_clip.shape != f_clip.shape:
        raise ShapeError(f"clip shapes differ: {b_clip.shape} vs {f_clip.shape}")
    if b_clip.shape[0] != len(schedule.values):
        raise ShapeError(
            f"clip length {b_clip.shape[0]} != schedule length {len(schedule.values)}"
        )
    return np.stack(
        [composite(b_clip[t], f_clip[t], schedule.values[t]) for t in range(b_clip.shape[0])]
    )
