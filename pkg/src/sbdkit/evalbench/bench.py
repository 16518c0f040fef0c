"""Batch-size throughput harness for the detection pipeline.

Each batch size is timed twice over the whole source. Decode-excluded timing
(the default) pre-decodes and pre-windows the frames, then times inference +
merging + post-processing; end-to-end timing includes decode. Peak memory is
the process's high-water RSS, which only grows over a run sequence.
"""
from __future__ import annotations

import json
import resource
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core.frames import FrameSource, ingest_frame, window_starts
from ..core.types import SEGMENT_LENGTH, DomainError
from ..pipeline.detect import Detector, detect_with_labeler


@dataclass
class BenchRun:
    batch_size: int
    rep: int
    ok: bool
    seconds: float = 0.0
    frames: int = 0
    iterations: int = 0
    realtime_factor: float = 0.0
    peak_rss_bytes: int = 0
    error: str | None = None

    def to_json(self) -> dict:
        return {
            "batch_size": self.batch_size,
            "rep": self.rep,
            "ok": self.ok,
            "seconds": self.seconds,
            "frames": self.frames,
            "iterations": self.iterations,
            "realtime_factor": self.realtime_factor,
            "peak_rss_bytes": self.peak_rss_bytes,
            "error": self.error,
        }


@dataclass
class ThroughputReport:
    fps: float = 0.0
    frames: int = 0
    timing: str = "model_pipeline"  # or "end_to_end"
    runs: list[BenchRun] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "fps": self.fps,
            "frames": self.frames,
            "timing": self.timing,
            "runs": [r.to_json() for r in self.runs],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def format_table(self) -> str:
        header = (
            f"{'Batch size':>10} {'Rep':>4} {'Seconds':>9} {'Memory':>12} "
            f"{'Iterations':>11} {'Realtime factor':>16}"
        )
        rows = [header]
        for r in self.runs:
            if r.ok:
                rows.append(
                    f"{r.batch_size:>10} {r.rep:>4} {r.seconds:>9.3f} {r.peak_rss_bytes:>12} "
                    f"{r.iterations:>11} {r.realtime_factor:>16.2f}"
                )
            else:
                rows.append(f"{r.batch_size:>10} {r.rep:>4} {'failed: ' + (r.error or '?'):>50}")
        return "\n".join(rows)

    def best_seconds(self, batch_size: int) -> float | None:
        times = [r.seconds for r in self.runs if r.ok and r.batch_size == batch_size]
        return min(times) if times else None


class _ArrayFrameSource(FrameSource):
    """In-memory FrameSource over pre-decoded frames (decode-excluded timing)."""

    def __init__(self, frames: np.ndarray, fps: float, uri: str):
        self.uri = uri
        self.fps = fps
        self.frame_count = frames.shape[0]
        self.dimensions = (frames.shape[2], frames.shape[1])
        self._frames = frames

    def read(self, index: int) -> np.ndarray:
        self._check_index(index)
        return self._frames[index]


def _peak_rss_bytes() -> int:
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024  # Linux reports KiB


def benchmark(
    detector: Detector,
    source: FrameSource,
    batch_sizes: list[int],
    reps: int = 2,
    include_decode: bool = False,
) -> ThroughputReport:
    """Sweep batch sizes over a source; OOM at one size is recorded, not fatal."""
    report = ThroughputReport(
        fps=source.fps,
        frames=source.frame_count,
        timing="end_to_end" if include_decode else "model_pipeline",
    )
    if not batch_sizes:
        return report
    starts = window_starts(source.frame_count)
    if len(starts) < max(batch_sizes):
        raise DomainError(
            f"source yields {len(starts)} segments; need >= {max(batch_sizes)} "
            "for one full batch at the largest batch size"
        )

    if include_decode:
        timed_source = source
    else:
        decoded = np.stack(
            [ingest_frame(source.read(i), detector.ingest) for i in range(source.frame_count)]
        )
        timed_source = _ArrayFrameSource(decoded, source.fps, uri=source.uri)

    duration_s = source.frame_count / source.fps
    for batch_size in batch_sizes:
        for rep in range(reps):
            run = BenchRun(batch_size=batch_size, rep=rep, ok=False, frames=source.frame_count)
            try:
                t0 = time.perf_counter()
                detect_with_labeler(
                    timed_source,
                    detector.label_segments,
                    ppconfig=detector.ppconfig,
                    batch_size=batch_size,
                    ingest=detector.ingest,
                )
                elapsed = time.perf_counter() - t0
                run.ok = True
                run.seconds = elapsed
                run.iterations = int(np.ceil(len(starts) / batch_size))
                run.realtime_factor = duration_s / elapsed if elapsed > 0 else 0.0
            except (MemoryError, RuntimeError) as exc:
                run.error = str(exc)
            run.peak_rss_bytes = _peak_rss_bytes()
            report.runs.append(run)
    return report
