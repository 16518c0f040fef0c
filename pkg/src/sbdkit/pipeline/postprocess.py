"""Histogram-driven post-processing: false-positive filtering and cut localization."""
from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from ..core.frames import FrameSource
from ..core.types import DomainError, TransitionEvent


@dataclass
class PostProcessConfig:
    color_space: str = "hsv"
    bins: tuple[int, int, int] = (16, 16, 16)
    bhattacharyya_threshold: float = 0.2

    def __post_init__(self):
        if not 0.0 <= self.bhattacharyya_threshold <= 1.0:
            raise DomainError("bhattacharyya_threshold outside [0, 1]")
        if any(b < 2 for b in self.bins):
            raise DomainError("need at least 2 bins per channel")


def color_histogram(frame: np.ndarray, config: PostProcessConfig | None = None) -> np.ndarray:
    """Normalized color histogram of an RGB frame (sums to 1)."""
    config = config or PostProcessConfig()
    if config.color_space == "hsv":
        img = cv2.cvtColor(frame, cv2.COLOR_RGB2HSV)
        ranges = [0, 180, 0, 256, 0, 256]
    elif config.color_space == "rgb":
        img = frame
        ranges = [0, 256, 0, 256, 0, 256]
    else:
        raise DomainError(f"unknown color space {config.color_space!r}")
    hist = cv2.calcHist([img], [0, 1, 2], None, list(config.bins), ranges).ravel().astype(np.float64)
    total = hist.sum()
    if total <= 0.0:  # uniform fallback for degenerate input
        return np.full(hist.size, 1.0 / hist.size)
    return hist / total


def bhattacharyya_distance(h1: np.ndarray, h2: np.ndarray) -> float:
    """d = sqrt(1 - sum_i sqrt(h1_i * h2_i)); 0 identical, 1 disjoint support."""
    h1 = np.asarray(h1, dtype=np.float64)
    h2 = np.asarray(h2, dtype=np.float64)
    if h1.shape != h2.shape:
        raise DomainError(f"histogram shapes differ: {h1.shape} vs {h2.shape}")
    coefficient = float(np.sum(np.sqrt(h1 * h2)))
    return float(np.sqrt(max(0.0, 1.0 - coefficient)))


def bhattacharyya_filter(
    event: TransitionEvent, source: FrameSource, config: PostProcessConfig | None = None
) -> bool:
    """Keep a gradual/wipe event iff its endpoint frames differ enough in color.

    Returns True (keep) when the distance between the first and last frame's
    histograms is >= the threshold; low-motion lookalikes fall below it.
    """
    config = config or PostProcessConfig()
    h_first = color_histogram(source.read(event.start_frame), config)
    h_last = color_histogram(source.read(event.end_frame), config)
    return bhattacharyya_distance(h_first, h_last) >= config.bhattacharyya_threshold


def localize_sharp(
    event: TransitionEvent, source: FrameSource, config: PostProcessConfig | None = None
) -> TransitionEvent:
    """Narrow a sharp-labeled range to the frame pair with maximal histogram distance."""
    config = config or PostProcessConfig()
    if event.end_frame - event.start_frame < 1:
        raise DomainError("cannot localize a cut inside a range with no frame pair")
    hists = [
        color_histogram(source.read(i), config)
        for i in range(event.start_frame, event.end_frame + 1)
    ]
    distances = [bhattacharyya_distance(hists[k], hists[k + 1]) for k in range(len(hists) - 1)]
    k = int(np.argmax(distances))
    return TransitionEvent(
        label=event.label,
        start_frame=event.start_frame + k,
        end_frame=event.start_frame + k + 1,
        score=event.score,
    )
