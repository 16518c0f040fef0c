"""Frame access, 112x112 ingest, and fixed-stride windowing.

A FrameSource gives uniform, index-addressable, read-only access to the decoded
RGB frames of a video file or a directory of numerically ordered images. Handles
are not safe to share across concurrent readers; open one per worker.
"""
from __future__ import annotations

import re
from pathlib import Path
from typing import Iterator

import cv2
import numpy as np

from .types import (
    FRAME_SIZE,
    SEGMENT_LENGTH,
    SEGMENT_OVERLAP,
    EmptySourceError,
    SegmentSample,
    ShapeError,
    SourceOpenError,
)

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".webp"}
DEFAULT_FPS = 25.0


class FrameSource:
    """Base class: index-addressable RGB frames with declared count/fps/dims."""

    uri: str
    frame_count: int
    fps: float
    dimensions: tuple[int, int]  # (width, height)

    def read(self, index: int) -> np.ndarray:
        raise NotImplementedError

    def read_range(self, start: int, stop: int) -> list[np.ndarray]:
        return [self.read(i) for i in range(start, stop)]

    def close(self) -> None:
        pass

    def __enter__(self) -> "FrameSource":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _check_index(self, index: int) -> None:
        if not 0 <= index < self.frame_count:
            raise IndexError(f"frame index {index} outside [0, {self.frame_count})")

    def _check_frame(self, frame: np.ndarray, index: int) -> np.ndarray:
        if frame is None:
            raise SourceOpenError(f"{self.uri}: failed to decode frame {index}")
        if frame.ndim != 3 or frame.shape[2] != 3:
            raise ShapeError(f"{self.uri}: frame {index} is not 3-channel")
        w, h = self.dimensions
        if frame.shape[0] != h or frame.shape[1] != w:
            raise ShapeError(
                f"{self.uri}: frame {index} is {frame.shape[1]}x{frame.shape[0]}, "
                f"declared {w}x{h}"
            )
        if frame.dtype != np.uint8:
            raise ShapeError(f"{self.uri}: frame {index} dtype {frame.dtype}")
        return frame


def _numeric_key(path: Path) -> tuple:
    m = re.search(r"(\d+)", path.stem)
    return (int(m.group(1)) if m else float("inf"), path.name)


class ImageDirectorySource(FrameSource):
    """Directory of numerically ordered images, one frame per file."""

    def __init__(self, uri: str, fps: float = DEFAULT_FPS):
        root = Path(uri)
        if not root.is_dir():
            raise SourceOpenError(f"{uri}: not a readable directory")
        self._files = sorted(
            (p for p in root.iterdir() if p.suffix.lower() in IMAGE_EXTENSIONS),
            key=_numeric_key,
        )
        if not self._files:
            raise EmptySourceError(f"{uri}: no image frames found")
        self.uri = str(uri)
        self.fps = float(fps)
        self.frame_count = len(self._files)
        first = cv2.imread(str(self._files[0]), cv2.IMREAD_COLOR)
        if first is None:
            raise SourceOpenError(f"{uri}: cannot decode {self._files[0].name}")
        self.dimensions = (first.shape[1], first.shape[0])

    def read(self, index: int) -> np.ndarray:
        self._check_index(index)
        bgr = cv2.imread(str(self._files[index]), cv2.IMREAD_COLOR)
        if bgr is None:
            raise SourceOpenError(f"{self.uri}: cannot decode {self._files[index].name}")
        return self._check_frame(np.ascontiguousarray(bgr[:, :, ::-1]), index)


class VideoFileSource(FrameSource):
    """Video file decoded through OpenCV; sequential reads are fast, seeks exact
    for the intra-frame codecs the toolkit writes (MJPG/FFV1)."""

    def __init__(self, uri: str, fps: float | None = None):
        self._cap = cv2.VideoCapture(str(uri))
        if not self._cap.isOpened():
            raise SourceOpenError(f"{uri}: cannot open video")
        self.uri = str(uri)
        count = int(round(self._cap.get(cv2.CAP_PROP_FRAME_COUNT)))
        if count <= 0:
            count = self._scan_count()
        if count <= 0:
            self._cap.release()
            raise EmptySourceError(f"{uri}: video has no frames")
        self.frame_count = count
        cap_fps = self._cap.get(cv2.CAP_PROP_FPS)
        self.fps = float(fps) if fps else (float(cap_fps) if cap_fps > 0 else DEFAULT_FPS)
        self._next = 0
        first = self.read(0)
        self.dimensions = (first.shape[1], first.shape[0])

    def _scan_count(self) -> int:
        n = 0
        while self._cap.grab():
            n += 1
        self._cap.set(cv2.CAP_PROP_POS_FRAMES, 0)
        return n

    def read(self, index: int) -> np.ndarray:
        if hasattr(self, "frame_count"):
            self._check_index(index)
        if index != self._next:
            self._cap.set(cv2.CAP_PROP_POS_FRAMES, index)
        ok, bgr = self._cap.read()
        if not ok:
            raise SourceOpenError(f"{self.uri}: failed to read frame {index}")
        self._next = index + 1
        frame = np.ascontiguousarray(bgr[:, :, ::-1])
        if not hasattr(self, "dimensions"):
            return frame
        return self._check_frame(frame, index)

    def close(self) -> None:
        self._cap.release()


def open_frame_source(uri: str, fps: float | None = None) -> FrameSource:
    """Open a video file or an image directory as a FrameSource."""
    path = Path(uri)
    if path.is_dir():
        return ImageDirectorySource(uri, fps=fps if fps else DEFAULT_FPS)
    if not path.exists():
        raise SourceOpenError(f"{uri}: no such file or directory")
    return VideoFileSource(uri, fps=fps)


def resize_frame(frame: np.ndarray, size: tuple[int, int] = (FRAME_SIZE, FRAME_SIZE)) -> np.ndarray:
    """Bilinear resize with corner-aligned sampling; channel order preserved.

    Corner output pixels equal the corresponding source corner pixels exactly.
    """
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ShapeError(f"expected HxWx3 frame, got shape {tuple(frame.shape)}")
    out_h, out_w = size
    h, w = frame.shape[:2]
    if h < 1 or w < 1:
        raise ShapeError("empty frame")
    if (h, w) == (out_h, out_w):
        return frame.copy()
    ys = np.linspace(0.0, h - 1.0, out_h)
    xs = np.linspace(0.0, w - 1.0, out_w)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0)[:, None, None]
    wx = (xs - x0)[None, :, None]
    img = frame.astype(np.float64)
    top = img[y0][:, x0] * (1.0 - wx) + img[y0][:, x1] * wx
    bottom = img[y1][:, x0] * (1.0 - wx) + img[y1][:, x1] * wx
    out = top * (1.0 - wy) + bottom * wy
    return np.rint(out).astype(np.uint8)


def center_crop_frame(frame: np.ndarray, size: tuple[int, int] = (FRAME_SIZE, FRAME_SIZE)) -> np.ndarray:
    """Alternate ingest policy: scale the short side to target, then center-crop."""
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ShapeError(f"expected HxWx3 frame, got shape {tuple(frame.shape)}")
    out_h, out_w = size
    h, w = frame.shape[:2]
    scale = max(out_h / h, out_w / w)
    mid_h, mid_w = max(out_h, int(round(h * scale))), max(out_w, int(round(w * scale)))
    scaled = resize_frame(frame, (mid_h, mid_w))
    top = (mid_h - out_h) // 2
    left = (mid_w - out_w) // 2
    return scaled[top : top + out_h, left : left + out_w].copy()


def ingest_frame(frame: np.ndarray, policy: str = "resize") -> np.ndarray:
    if policy == "resize":
        return resize_frame(frame)
    if policy == "center_crop":
        return center_crop_frame(frame)
    raise ValueError(f"unknown ingest policy {policy!r}")


def window_starts(frame_count: int, length: int = SEGMENT_LENGTH, overlap: int = SEGMENT_OVERLAP) -> list[int]:
    """Start indices of fixed-length windows at stride (length - overlap).

    A window is emitted only while it contributes at least one real frame not
    covered by the previous window; the final window may need tail padding.
    """
    if frame_count < 1:
        return []
    stride = length - overlap
    starts = [0]
    i = 1
    while stride * i + overlap < frame_count:
        starts.append(stride * i)
        i += 1
    return starts


def _window_frames(source: FrameSource, start: int, length: int, policy: str) -> tuple[np.ndarray, int]:
    stop = min(start + length, source.frame_count)
    frames = [ingest_frame(source.read(i), policy) for i in range(start, stop)]
    pad = length - len(frames)
    if pad:
        frames.extend([frames[-1]] * pad)
    return np.stack(frames).astype(np.uint8), pad


def iter_windows(
    source: FrameSource,
    length: int = SEGMENT_LENGTH,
    overlap: int = SEGMENT_OVERLAP,
    ingest: str = "resize",
) -> Iterator[SegmentSample]:
    """Stream unlabeled SegmentSamples; the padded tail repeats the last frame."""
    for start in window_starts(source.frame_count, length, overlap):
        frames, pad = _window_frames(source, start, length, ingest)
        yield SegmentSample(
            frames=frames,
            label=None,
            origin={"source": source.uri, "start_frame": start, "pad": pad, "ingest": ingest},
        )


def window_video(
    source: FrameSource,
    length: int = SEGMENT_LENGTH,
    overlap: int = SEGMENT_OVERLAP,
    ingest: str = "resize",
) -> list[SegmentSample]:
    return list(iter_windows(source, length, overlap, ingest))
