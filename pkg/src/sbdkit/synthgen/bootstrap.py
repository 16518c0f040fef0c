"""Hard-negative bootstrapping: export gradual detections for manual review,
then import the reviewed labels as a training manifest.

The export writes each 16-frame segment under a gradual detection as a
reviewable PNG clip plus a JSON labeling sidecar initialized to "unlabeled".
After external labeling, import_bootstrap_package partitions the candidates
into {no_transition, gradual, sharp} and emits a dataset manifest.
"""
from __future__ import annotations

import json
from pathlib import Path

from ..core.frames import FrameSource, _window_frames, window_starts
from ..core.manifest import DatasetManifest, ManifestEntry, save_segment_payload
from ..core.types import SEGMENT_LENGTH, SEGMENT_OVERLAP, ManifestError, TransitionEvent, TransitionLabel

BOOTSTRAP_SCHEMA = "sbd-bootstrap/1"
SIDECAR_NAME = "labels.json"
REVIEW_LABELS = ("no_transition", "gradual", "sharp")


def _covering_starts(event: TransitionEvent, frame_count: int) -> list[int]:
    """Stride-8 segment starts whose windows overlap the event range."""
    starts = window_starts(frame_count)
    lo = max(0, event.start_frame - SEGMENT_LENGTH + 1)
    return [s for s in starts if lo <= s <= event.end_frame]


def export_bootstrap_candidates(
    detections: dict[str, list[TransitionEvent]],
    sources: dict[str, FrameSource],
    out_dir: str | Path,
    ingest: str = "resize",
) -> Path:
    """Write a review package for every gradual detection; returns the package dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    candidates = []
    for video_id in sorted(detections):
        source = sources[video_id]
        for event in detections[video_id]:
            if event.label is not TransitionLabel.GRADUAL:
                continue
            for start in _covering_starts(event, source.frame_count):
                cid = f"{video_id}-{start:08d}"
                frames, _ = _window_frames(source, start, SEGMENT_LENGTH, ingest)
                save_segment_payload(frames, out_dir, f"clips/{cid}", "png")
                candidates.append(
                    {
                        "candidate_id": cid,
                        "video_id": video_id,
                        "start_frame": int(start),
                        "detection_score": float(event.score),
                        "label": "unlabeled",
                    }
                )
    sidecar = {"schema": BOOTSTRAP_SCHEMA, "candidates": candidates}
    (out_dir / SIDECAR_NAME).write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out_dir


def import_bootstrap_package(package_dir: str | Path) -> DatasetManifest:
    """Turn a reviewed package into a manifest partitioned by the assigned labels.

    Candidates still marked "unlabeled" are skipped. The manifest references the
    package clips in place (PNG payloads) and is written into the package dir.
    """
    package_dir = Path(package_dir)
    sidecar_path = package_dir / SIDECAR_NAME
    if not sidecar_path.exists():
        raise ManifestError(f"{package_dir}: missing {SIDECAR_NAME}")
    sidecar = json.loads(sidecar_path.read_text(encoding="utf-8"))
    if sidecar.get("schema") != BOOTSTRAP_SCHEMA:
        raise ManifestError(f"{package_dir}: unsupported sidecar schema")
    entries = []
    for cand in sidecar.get("candidates", []):
        label = cand.get("label", "unlabeled")
        if label == "unlabeled":
            continue
        if label not in REVIEW_LABELS:
            raise ManifestError(f"candidate {cand.get('candidate_id')}: label {label!r} not in {REVIEW_LABELS}")
        entries.append(
            ManifestEntry(
                segment_id=str(cand["candidate_id"]),
                payload=f"clips/{cand['candidate_id']}",
                label=TransitionLabel.parse(label),
                alpha_schedule={"kind": "real"},
                provenance={
                    "video_id": cand.get("video_id"),
                    "start_frame": int(cand.get("start_frame", 0)),
                    "detection_score": float(cand.get("detection_score", 0.0)),
                    "origin": "bootstrap",
                },
            )
        )
    manifest = DatasetManifest(entries=entries, payload_format="png")
    manifest.write(package_dir / "manifest.jsonl")
    return manifest
