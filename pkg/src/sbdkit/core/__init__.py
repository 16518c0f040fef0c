from .types import (
    CLASS_ORDER,
    FRAME_SIZE,
    SEGMENT_LENGTH,
    SEGMENT_OVERLAP,
    CoverageError,
    DomainError,
    EmptySourceError,
    EventDocument,
    ExhaustionError,
    LayerError,
    ManifestError,
    OrderingError,
    SbdError,
    ScheduleError,
    SegmentSample,
    ShapeError,
    SourceOpenError,
    TransitionEvent,
    TransitionLabel,
    VideoIdError,
)
from .frames import (
    FrameSource,
    ImageDirectorySource,
    VideoFileSource,
    center_crop_frame,
    ingest_frame,
    iter_windows,
    open_frame_source,
    resize_frame,
    window_starts,
    window_video,
)
from .manifest import (
    MANIFEST_SCHEMA,
    DatasetManifest,
    ManifestEntry,
    load_events,
    load_segment_payload,
    save_events,
    save_segment_payload,
)

__all__ = [name for name in dir() if not name.startswith("_")]
