"""Per-frame alpha schedules defining transition type and duration.

Alpha is the mixing weight of the previous shot: 1.0 shows only the previous
shot, 0.0 only the next. Scalar values give sharp/dissolve transitions; 2-D
mattes (spatially varying alpha) give wipes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core.types import ScheduleError

SCHEDULE_LENGTH = 16


@dataclass
class AlphaSchedule:
    kind: str  # "none" | "sharp" | "dissolve" | "wipe"
    values: list  # one scalar or one (H, W) matte per frame
    duration: int
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def spatial_means(self) -> np.ndarray:
        return np.array(
            [float(np.mean(v)) if isinstance(v, np.ndarray) else float(v) for v in self.values]
        )

    def validate(self) -> None:
        if len(self.values) != SCHEDULE_LENGTH:
            raise ScheduleError(f"schedule has {len(self.values)} frames, expected {SCHEDULE_LENGTH}")
        means = self.spatial_means()
        if means.min() < 0.0 or means.max() > 1.0:
            raise ScheduleError("alpha values outside [0, 1]")
        if self.kind == "none":
            if not all(np.isscalar(v) and v == 1.0 for v in self.values):
                raise ScheduleError("a no-transition schedule is all ones")
        elif self.kind == "sharp":
            if sorted(self.values, reverse=True) != list(self.values) or set(self.values) != {1.0, 0.0}:
                raise ScheduleError("a sharp schedule is a 1.0 prefix then a 0.0 suffix")
        elif self.kind == "dissolve":
            if any(isinstance(v, np.ndarray) for v in self.values):
                raise ScheduleError("dissolve schedules are scalar")
            if np.any(np.diff(means) > 0):
                raise ScheduleError("dissolve schedule must be non-increasing")
            if "offset" in self.descriptor:
                lo = int(self.descriptor["offset"])
                inside = means[lo : lo + self.duration]
                if inside.size and (inside.min() <= 0.0 or inside.max() >= 1.0):
                    raise ScheduleError("dissolve interior values must lie strictly in (0, 1)")
        elif self.kind == "wipe":
            if np.any(np.diff(means) > 1e-9):
                raise ScheduleError("wipe spatial means must be non-increasing")
        else:
            raise ScheduleError(f"unknown schedule kind {self.kind!r}")


def no_transition_schedule() -> AlphaSchedule:
    return AlphaSchedule(
        kind="none", values=[1.0] * SCHEDULE_LENGTH, duration=0, descriptor={"kind": "none"}
    )


def make_sharp_schedule(boundary_index: int) -> AlphaSchedule:
    """Alpha 1.0 before the boundary, 0.0 from it on; boundary in [1, 15]."""
    if not 1 <= boundary_index <= SCHEDULE_LENGTH - 1:
        raise ScheduleError(
            f"sharp boundary {boundary_index} outside [1, {SCHEDULE_LENGTH - 1}]: "
            "the cut must be visible inside the window"
        )
    values = [1.0] * boundary_index + [0.0] * (SCHEDULE_LENGTH - boundary_index)
    return AlphaSchedule(
        kind="sharp",
        values=values,
        duration=1,
        descriptor={"kind": "sharp", "boundary_index": int(boundary_index)},
    )


def _interior_uniform(rng: np.random.Generator, n: int) -> np.ndarray:
    # strictly inside (0, 1); rng.random() can return exactly 0.0
    vals = rng.random(n)
    while True:
        bad = (vals <= 0.0) | (vals >= 1.0)
        if not bad.any():
            return vals
        vals[bad] = rng.random(int(bad.sum()))


def make_dissolve_schedule(n: int, rng: np.random.Generator) -> AlphaSchedule:
    """N uniform draws sorted descending, placed at a random in-window offset.

    Frames before the placement are 1.0, frames after are 0.0; the resulting
    sequence is non-increasing with the N interior values strictly in (0, 1).
    """
    if not 2 <= n <= SCHEDULE_LENGTH:
        raise ScheduleError(f"dissolve duration {n} outside [2, {SCHEDULE_LENGTH}]")
    draws = np.sort(_interior_uniform(rng, n))[::-1]
    offset = int(rng.integers(0, SCHEDULE_LENGTH - n + 1))
    values = [1.0] * offset + [float(v) for v in draws] + [0.0] * (SCHEDULE_LENGTH - offset - n)
    return AlphaSchedule(
        kind="dissolve",
        values=values,
        duration=n,
        descriptor={
            "kind": "dissolve",
            "n": int(n),
            "offset": offset,
            "values": [float(v) for v in draws],
        },
    )
