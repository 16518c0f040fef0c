"""Domain types and errors shared across the toolkit."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

SEGMENT_LENGTH = 16
SEGMENT_OVERLAP = 8
FRAME_SIZE = 112

# Fixed class order; also the tie-break order everywhere a tie must be broken.
CLASS_ORDER = ("no_transition", "gradual", "sharp", "wipe")


class SbdError(Exception):
    """Base class for toolkit errors."""


class SourceOpenError(SbdError):
    pass


class EmptySourceError(SbdError):
    pass


class ShapeError(SbdError):
    pass


class DomainError(SbdError):
    """A numeric argument outside its documented domain."""


class ScheduleError(SbdError):
    """Invalid alpha-schedule parameters (boundary, duration, family)."""


class ExhaustionError(SbdError):
    """Not enough clean source material for a requested label."""

    def __init__(self, label: str, message: str):
        super().__init__(message)
        self.label = label


class CoverageError(SbdError):
    """A training manifest is missing an active class."""


class OrderingError(SbdError):
    pass


class LayerError(SbdError):
    pass


class VideoIdError(SbdError):
    pass


class ManifestError(SbdError):
    pass


class TransitionLabel(str, enum.Enum):
    NO_TRANSITION = "no_transition"
    SHARP = "sharp"
    GRADUAL = "gradual"
    WIPE = "wipe"

    @classmethod
    def parse(cls, value: "TransitionLabel | str") -> "TransitionLabel":
        if isinstance(value, cls):
            return value
        name = str(value).strip().lower()
        if name == "none":  # accepted alias in synthesis specs
            name = "no_transition"
        try:
            return cls(name)
        except ValueError:
            raise DomainError(f"unknown transition label: {value!r}") from None


@dataclass
class TransitionEvent:
    """A typed, frame-ranged transition (annotation or detection).

    Frames are 0-based and the range [start_frame, end_frame] is inclusive.
    Sharp events span exactly one frame pair (end == start + 1).
    """

    label: TransitionLabel
    start_frame: int
    end_frame: int
    score: float = 1.0

    def __post_init__(self):
        self.label = TransitionLabel.parse(self.label)
        if self.label is TransitionLabel.NO_TRANSITION:
            raise DomainError("a TransitionEvent cannot carry the no_transition label")
        if self.start_frame > self.end_frame:
            raise DomainError(
                f"start_frame {self.start_frame} > end_frame {self.end_frame}"
            )
        if not 0.0 <= self.score <= 1.0:
            raise DomainError(f"score {self.score} outside [0, 1]")

    def validate(self) -> None:
        """Full contract for annotations and final detections; intermediate merged
        sharp runs span whole segment ranges until localization narrows them."""
        if self.label is TransitionLabel.SHARP and self.end_frame != self.start_frame + 1:
            raise DomainError("sharp events span exactly one frame pair")

    def to_json(self) -> dict:
        return {
            "label": self.label.value,
            "start_frame": int(self.start_frame),
            "end_frame": int(self.end_frame),
            "score": float(self.score),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TransitionEvent":
        event = cls(
            label=TransitionLabel.parse(obj["label"]),
            start_frame=int(obj["start_frame"]),
            end_frame=int(obj["end_frame"]),
            score=float(obj.get("score", 1.0)),
        )
        event.validate()
        return event


@dataclass
class EventDocument:
    """Annotations or detections for one video."""

    video_id: str
    events: list[TransitionEvent] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"video_id": self.video_id, "events": [e.to_json() for e in self.events]}

    @classmethod
    def from_json(cls, obj: dict) -> "EventDocument":
        return cls(
            video_id=str(obj["video_id"]),
            events=[TransitionEvent.from_json(e) for e in obj.get("events", [])],
        )


@dataclass
class SegmentSample:
    """A 16-frame, 112x112 RGB clip; the unit of training and inference.

    `label` is None for unlabeled inference windows. `origin` records where the
    frames came from (source ids, start indices, schedule id) for reproducibility.
    """

    frames: np.ndarray
    label: TransitionLabel | None = None
    origin: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        shape = tuple(self.frames.shape)
        expected = (SEGMENT_LENGTH, FRAME_SIZE, FRAME_SIZE, 3)
        if shape != expected:
            raise ShapeError(f"segment frames shape {shape}, expected {expected}")
        if self.frames.dtype != np.uint8:
            raise ShapeError(f"segment frames dtype {self.frames.dtype}, expected uint8")

    @property
    def start_frame(self) -> int:
        return int(self.origin.get("start_frame", 0))
