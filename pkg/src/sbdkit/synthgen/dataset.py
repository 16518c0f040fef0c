"""Synthetic transition dataset builder.

Transition segments are composited from pairs of clean source windows (windows
far from any annotated transition); no-transition segments are single untouched
windows. Every segment is produced by a pure function of (sources, spec, seed,
segment id), so synthesis parallelizes per segment and any segment can be
regenerated in isolation.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core.frames import FrameSource, ingest_frame, open_frame_source
from ..core.manifest import DatasetManifest, ManifestEntry, save_segment_payload
from ..core.types import (
    SEGMENT_LENGTH,
    ExhaustionError,
    TransitionEvent,
    TransitionLabel,
)
from .composite import composite_clip
from .schedules import make_dissolve_schedule, make_sharp_schedule
from .wipes import render_wipe_schedule, sample_wipe_family

# per-label RNG stream ids; fixed so adding labels never reshuffles existing ones
_LABEL_STREAM = {"no_transition": 0, "gradual": 1, "sharp": 2, "wipe": 3}


@dataclass
class SynthesisSpec:
    counts: dict[str, int]
    min_offset: int = 32  # frames of separation from the nearest annotated transition
    fade_fraction: float = 0.1  # fraction of dissolves rendered against black
    duration_range: tuple[int, int] = (2, 16)
    payload_format: str = "npy"
    ingest: str = "resize"

    def normalized_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for key, value in self.counts.items():
            out[TransitionLabel.parse(key).value] = int(value)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "SynthesisSpec":
        return cls(
            counts=dict(obj["counts"]),
            min_offset=int(obj.get("min_offset", 32)),
            fade_fraction=float(obj.get("fade_fraction", 0.1)),
            duration_range=tuple(obj.get("duration_range", (2, 16))),
            payload_format=str(obj.get("payload_format", "npy")),
            ingest=str(obj.get("ingest", "resize")),
        )


def find_clean_spans(
    frame_count: int, events: list[TransitionEvent], min_offset: int
) -> list[tuple[int, int]]:
    """Maximal [start, stop) intervals >= 16 frames long and at least min_offset
    frames away from every annotated transition."""
    blocked = np.zeros(frame_count, dtype=bool)
    for ev in events:
        lo = max(0, ev.start_frame - min_offset)
        hi = min(frame_count, ev.end_frame + min_offset + 1)
        blocked[lo:hi] = True
    spans = []
    start = None
    for i in range(frame_count + 1):
        free = i < frame_count and not blocked[i]
        if free and start is None:
            start = i
        elif not free and start is not None:
            if i - start >= SEGMENT_LENGTH:
                spans.append((start, i))
            start = None
    return spans


@dataclass
class _SynthContext:
    """Everything a worker needs to rebuild a segment from scratch."""

    uris: list[str]
    fps: list[float]
    spans: list[tuple[int, int, int]]  # (source index, span start, span stop)
    spec: SynthesisSpec
    seed: int

    weights: np.ndarray = field(init=False)
    cumulative: np.ndarray = field(init=False)

    def __post_init__(self):
        self.weights = np.array([stop - start - SEGMENT_LENGTH + 1 for _, start, stop in self.spans], dtype=np.int64)
        self.cumulative = np.cumsum(self.weights)

    @property
    def total_positions(self) -> int:
        return int(self.cumulative[-1]) if len(self.spans) else 0


# one decoded handle per (process, uri); FrameSources are not shared across workers
_PROCESS_SOURCES: dict[str, FrameSource] = {}


def _get_source(uri: str, fps: float) -> FrameSource:
    src = _PROCESS_SOURCES.get(uri)
    if src is None:
        src = open_frame_source(uri, fps=fps)
        _PROCESS_SOURCES[uri] = src
    return src


def _draw_window(ctx: _SynthContext, rng: np.random.Generator, exclude_span: int | None = None) -> tuple[int, int]:
    """Uniformly pick a (span index, window start) position, optionally excluding one span."""
    weights = ctx.weights.copy()
    if exclude_span is not None:
        weights[exclude_span] = 0
    total = int(weights.sum())
    if total < 1:
        raise ExhaustionError("any", "no clean window available outside the excluded span")
    ticket = int(rng.integers(0, total))
    cumulative = np.cumsum(weights)
    span_idx = int(np.searchsorted(cumulative, ticket, side="right"))
    prev = int(cumulative[span_idx - 1]) if span_idx else 0
    _, span_start, _ = ctx.spans[span_idx]
    return span_idx, span_start + (ticket - prev)


def _read_clip(ctx: _SynthContext, span_idx: int, start: int) -> np.ndarray:
    src_idx = ctx.spans[span_idx][0]
    src = _get_source(ctx.uris[src_idx], ctx.fps[src_idx])
    frames = [ingest_frame(src.read(i), ctx.spec.ingest) for i in range(start, start + SEGMENT_LENGTH)]
    return np.stack(frames)


def _segment_rng(seed: int, label: str, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_LABEL_STREAM[label], index)))


def render_segment(ctx: _SynthContext, label: str, index: int) -> tuple[dict, np.ndarray]:
    """Build one manifest entry and its frames; pure in (ctx, label, index)."""
    rng = _segment_rng(ctx.seed, label, index)
    segment_id = f"{label}-{index:06d}"
    lo, hi = ctx.spec.duration_range

    if label == "no_transition":
        span_idx, start = _draw_window(ctx, rng)
        frames = _read_clip(ctx, span_idx, start)
        schedule_desc = {"kind": "none"}
        provenance = {"source": ctx.uris[ctx.spans[span_idx][0]], "start_frame": int(start)}
    else:
        b_span, b_start = _draw_window(ctx, rng)
        f_span, f_start = _draw_window(ctx, rng, exclude_span=b_span)
        b_clip = _read_clip(ctx, b_span, b_start)
        f_clip = _read_clip(ctx, f_span, f_start)
        fade = None
        if label == "sharp":
            schedule = make_sharp_schedule(int(rng.integers(1, SEGMENT_LENGTH)))
        elif label == "gradual":
            n = int(rng.integers(lo, hi + 1))
            schedule = make_dissolve_schedule(n, rng)
            if rng.random() < ctx.spec.fade_fraction:
                fade = "in" if rng.random() < 0.5 else "out"
                black = np.zeros_like(b_clip)
                if fade == "in":
                    b_clip = black  # black fades up into the live shot
                else:
                    f_clip = black  # live shot fades down to black
        elif label == "wipe":
            family = sample_wipe_family(rng)
            schedule = render_wipe_schedule(family, int(rng.integers(lo, hi + 1)), rng)
        else:
            raise ValueError(f"unknown label {label!r}")
        frames = composite_clip(b_clip, f_clip, schedule)
        schedule_desc = schedule.descriptor
        provenance = {
            "b": {"source": ctx.uris[ctx.spans[b_span][0]], "start_frame": int(b_start)},
            "f": {"source": ctx.uris[ctx.spans[f_span][0]], "start_frame": int(f_start)},
        }
        if fade:
            schedule_desc = dict(schedule_desc, fade=fade)

    suffix = ".npy" if ctx.spec.payload_format == "npy" else ""
    entry = {
        "segment_id": segment_id,
        "payload": f"segments/{segment_id}{suffix}",
        "label": label,
        "alpha_schedule": schedule_desc,
        "provenance": dict(provenance, seed=int(ctx.seed)),
    }
    return entry, frames


def _render_and_save(args) -> dict:
    ctx, label, index, out_dir = args
    entry, frames = render_segment(ctx, label, index)
    save_segment_payload(frames, out_dir, entry["payload"], ctx.spec.payload_format)
    return entry


def _check_feasibility(ctx: _SynthContext, counts: dict[str, int]) -> None:
    for label, count in counts.items():
        if count <= 0:
            continue
        if label == "no_transition":
            if ctx.total_positions < 1:
                raise ExhaustionError(label, "no clean 16-frame window available for no_transition segments")
        elif len(ctx.spans) < 2:
            raise ExhaustionError(
                label,
                f"label {label!r} needs two distinct clean spans, found {len(ctx.spans)}",
            )


def synthesize_dataset(
    sources: list[tuple[FrameSource, list[TransitionEvent]]],
    spec: SynthesisSpec,
    seed: int,
    out_dir: str | Path,
    workers: int = 1,
) -> DatasetManifest:
    """Emit a balanced, fully reproducible synthetic dataset under out_dir.

    Returns the manifest, also written to out_dir/manifest.jsonl. Identical
    (sources, spec, seed) produce byte-identical manifests and payloads.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    spans = []
    for src_idx, (source, events) in enumerate(sources):
        for start, stop in find_clean_spans(source.frame_count, events, spec.min_offset):
            spans.append((src_idx, start, stop))
    ctx = _SynthContext(
        uris=[s.uri for s, _ in sources],
        fps=[s.fps for s, _ in sources],
        spans=spans,
        spec=spec,
        seed=int(seed),
    )
    counts = spec.normalized_counts()
    _check_feasibility(ctx, counts)

    plan = [
        (ctx, label, index, str(out_dir))
        for label in sorted(counts)  # segment ids sort by label prefix, then index
        for index in range(counts[label])
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(_render_and_save, plan, chunksize=8))
    else:
        entries = [_render_and_save(item) for item in plan]

    manifest = DatasetManifest(
        entries=[ManifestEntry.from_json(e) for e in entries],
        payload_format=spec.payload_format,
    )
    manifest.write(out_dir / "manifest.jsonl")
    return manifest
