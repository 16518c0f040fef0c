"""Conv5 filter-response heatmaps for qualitative inspection.

Each filter's response is averaged over horizontal space, giving a
(time x vertical-space) block with time on the vertical axis; blocks are tiled
into a grid with thin green separators. Sharp transitions show up as a bright
horizontal discontinuity row; static content stays temporally uniform.
"""
from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np
import torch

from ..core.types import SegmentSample
from ..network.model import prepare_batch
from ..network.train import Checkpoint

GRID_COLOR = (0, 255, 0)


def conv5_response_maps(segment: SegmentSample | np.ndarray, checkpoint: Checkpoint) -> np.ndarray:
    """(filters, time, height) response maps, averaged over horizontal space."""
    frames = segment.frames if isinstance(segment, SegmentSample) else segment
    model = checkpoint.build_model()
    with torch.no_grad():
        x = prepare_batch(
            frames[None] if frames.ndim == 4 else frames, checkpoint.config.input_scale
        )
        conv5 = model(x, return_layers=("conv5",))["features"]["conv5"]
    return conv5[0].mean(dim=3).numpy()  # (C, T, H)


def filter_heatmap(
    segment: SegmentSample | np.ndarray,
    checkpoint: Checkpoint,
    scale: int = 6,
    columns: int | None = None,
) -> np.ndarray:
    """Render the conv5 response grid as an RGB image; deterministic."""
    maps = conv5_response_maps(segment, checkpoint)
    c, t, h = maps.shape
    lo, hi = float(maps.min()), float(maps.max())
    norm = (maps - lo) / (hi - lo) if hi > lo else np.zeros_like(maps)
    blocks = (norm * 255.0).astype(np.uint8)

    columns = columns or int(np.ceil(np.sqrt(c)))
    rows = int(np.ceil(c / columns))
    bh, bw = t * scale, h * scale
    image = np.zeros((rows * (bh + 1) + 1, columns * (bw + 1) + 1, 3), dtype=np.uint8)
    image[:, :] = GRID_COLOR
    for i in range(c):
        r, col = divmod(i, columns)
        block = np.repeat(np.repeat(blocks[i], scale, axis=0), scale, axis=1)
        y0, x0 = r * (bh + 1) + 1, col * (bw + 1) + 1
        image[y0 : y0 + bh, x0 : x0 + bw] = block[:, :, None]
    # unfilled grid cells stay green, matching the separator color
    return image


def temporal_discontinuity_score(segment: SegmentSample | np.ndarray, checkpoint: Checkpoint) -> float:
    """Mean across filters of the variance of per-time-row response means.

    Higher for segments whose content changes abruptly in time.
    """
    maps = conv5_response_maps(segment, checkpoint)
    row_means = maps.mean(axis=2)  # (C, T)
    return float(row_means.var(axis=1).mean())


def save_heatmap(image: np.ndarray, path: str | Path) -> None:
    cv2.imwrite(str(path), image[:, :, ::-1])
