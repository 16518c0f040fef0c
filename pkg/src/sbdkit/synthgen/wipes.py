"""Parametric wipe matte families.

Each family defines a spatial progress field: the order in which pixels flip
from the previous shot to the next. The field is rank-normalized over the pixel
grid, so thresholding it at phase p flips almost exactly a p-fraction of pixels
and the matte mean tracks 1 - p regardless of family geometry.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.types import FRAME_SIZE, ScheduleError
from .schedules import SCHEDULE_LENGTH, AlphaSchedule

WIPE_FAMILIES = (
    "left-right",
    "right-left",
    "top-bottom",
    "bottom-top",
    "diagonal",
    "iris-in",
    "iris-out",
    "vertical-bars",
    "horizontal-bars",
    "checker",
)

MAX_SOFTNESS = 0.2  # keeps the matte-mean-vs-phase error well under 0.05


@dataclass(frozen=True)
class WipeMatteFamily:
    family: str
    angle: float = 45.0  # degrees; diagonal only
    bands: int = 4  # bar/checker cell count
    softness: float = 0.06  # edge ramp width as a fraction of the progress range

    def __post_init__(self):
        if self.family not in WIPE_FAMILIES:
            raise ScheduleError(f"unknown wipe family {self.family!r}")
        if self.bands < 1:
            raise ScheduleError("bands must be >= 1")
        if not 0.0 <= self.softness <= MAX_SOFTNESS:
            raise ScheduleError(f"softness outside [0, {MAX_SOFTNESS}]")

    def descriptor(self) -> dict:
        return {
            "family": self.family,
            "angle": float(self.angle),
            "bands": int(self.bands),
            "softness": float(self.softness),
        }


def _raw_field(spec: WipeMatteFamily, size: tuple[int, int]) -> np.ndarray:
    h, w = size
    y = np.linspace(0.0, 1.0, h)[:, None] * np.ones((1, w))
    x = np.linspace(0.0, 1.0, w)[None, :] * np.ones((h, 1))
    f = spec.family
    if f == "left-right":
        return x
    if f == "right-left":
        return 1.0 - x
    if f == "top-bottom":
        return y
    if f == "bottom-top":
        return 1.0 - y
    if f == "diagonal":
        rad = np.deg2rad(spec.angle)
        return np.cos(rad) * x + np.sin(rad) * y
    r = np.hypot(x - 0.5, y - 0.5)
    if f == "iris-in":
        return r / r.max()
    if f == "iris-out":
        return 1.0 - r / r.max()
    if f == "vertical-bars":
        return (x * spec.bands) % 1.0
    if f == "horizontal-bars":
        return (y * spec.bands) % 1.0
    # checker: alternating cells wipe in two waves, sweeping within each cell
    cx = np.floor(x * spec.bands).clip(0, spec.bands - 1)
    cy = np.floor(y * spec.bands).clip(0, spec.bands - 1)
    parity = (cx + cy) % 2
    return 0.5 * parity + 0.5 * ((x * spec.bands) % 1.0)


def progress_field(spec: WipeMatteFamily, size: tuple[int, int] = (FRAME_SIZE, FRAME_SIZE)) -> np.ndarray:
    """Rank-normalized flip order in [0, 1]; its pixel distribution is uniform."""
    raw = _raw_field(spec, size)
    flat = raw.ravel()
    order = np.argsort(flat, kind="stable")
    ranks = np.empty(flat.size, dtype=np.float64)
    ranks[order] = np.arange(flat.size, dtype=np.float64)
    return (ranks / (flat.size - 1)).reshape(size)


def render_matte(
    spec: WipeMatteFamily,
    phase: float,
    size: tuple[int, int] = (FRAME_SIZE, FRAME_SIZE),
    field: np.ndarray | None = None,
) -> np.ndarray:
    """Matte at transition phase p in [0, 1]; mean alpha tracks 1 - p (within 0.05)."""
    if not 0.0 <= phase <= 1.0:
        raise ScheduleError(f"phase {phase} outside [0, 1]")
    if phase == 0.0:
        return np.ones(size, dtype=np.float32)
    if phase == 1.0:
        return np.zeros(size, dtype=np.float32)
    g = progress_field(spec, size) if field is None else field
    if spec.softness == 0.0:
        return (g >= phase).astype(np.float32)
    return np.clip((g - phase) / spec.softness + 0.5, 0.0, 1.0).astype(np.float32)


def render_wipe_schedule(spec: WipeMatteFamily, n: int, rng: np.random.Generator) -> AlphaSchedule:
    """N mattes at phases equally spaced in (0, 1), placed at a random offset."""
    if not 2 <= n <= SCHEDULE_LENGTH:
        raise ScheduleError(f"wipe duration {n} outside [2, {SCHEDULE_LENGTH}]")
    field = progress_field(spec)
    phases = [(k + 1) / (n + 1) for k in range(n)]
    mattes = [render_matte(spec, p, field=field) for p in phases]
    offset = int(rng.integers(0, SCHEDULE_LENGTH - n + 1))
    values: list = (
        [1.0] * offset + mattes + [0.0] * (SCHEDULE_LENGTH - offset - n)
    )
    descriptor = dict(spec.descriptor(), kind="wipe", n=int(n), offset=offset)
    return AlphaSchedule(kind="wipe", values=values, duration=n, descriptor=descriptor)


def sample_wipe_family(rng: np.random.Generator) -> WipeMatteFamily:
    family = str(rng.choice(WIPE_FAMILIES))
    return WipeMatteFamily(
        family=family,
        angle=float(rng.uniform(15.0, 75.0)),
        bands=int(rng.integers(2, 7)),
        softness=float(rng.uniform(0.0, 0.12)),
    )


def schedule_from_descriptor(descriptor: dict, rng: np.random.Generator | None = None) -> AlphaSchedule:
    """Rebuild a wipe schedule deterministically from its manifest descriptor."""
    spec = WipeMatteFamily(
        family=descriptor["family"],
        angle=float(descriptor.get("angle", 45.0)),
        bands=int(descriptor.get("bands", 4)),
        softness=float(descriptor.get("softness", 0.06)),
    )
    n, offset = int(descriptor["n"]), int(descriptor["offset"])
    field = progress_field(spec)
    mattes = [render_matte(spec, (k + 1) / (n + 1), field=field) for k in range(n)]
    values: list = [1.0] * offset + mattes + [0.0] * (SCHEDULE_LENGTH - offset - n)
    return AlphaSchedule(kind="wipe", values=values, duration=n, descriptor=dict(descriptor))
