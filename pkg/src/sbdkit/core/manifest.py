"""Dataset manifest (JSON-lines) and annotation/detection documents (JSON)."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from .types import EventDocument, ManifestError, TransitionLabel

MANIFEST_SCHEMA = "sbd-manifest/1"
PAYLOAD_FORMATS = ("npy", "png")


def _canonical(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass
class ManifestEntry:
    segment_id: str
    payload: str  # locator relative to the manifest directory
    label: TransitionLabel
    alpha_schedule: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "segment_id": self.segment_id,
            "payload": self.payload,
            "label": self.label.value,
            "alpha_schedule": self.alpha_schedule,
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ManifestEntry":
        return cls(
            segment_id=str(obj["segment_id"]),
            payload=str(obj["payload"]),
            label=TransitionLabel.parse(obj["label"]),
            alpha_schedule=dict(obj.get("alpha_schedule", {})),
            provenance=dict(obj.get("provenance", {})),
        )


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry] = field(default_factory=list)
    payload_format: str = "npy"

    @property
    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for e in self.entries:
            out[e.label.value] = out.get(e.label.value, 0) + 1
        return out

    def validate(self) -> None:
        if self.payload_format not in PAYLOAD_FORMATS:
            raise ManifestError(f"unknown payload format {self.payload_format!r}")
        ids = [e.segment_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ManifestError("segment_id values are not unique")

    def write(self, path: str | Path) -> None:
        self.validate()
        path = Path(path)
        with path.open("w", encoding="utf-8") as fh:
            fh.write(
                _canonical(
                    {
                        "schema": MANIFEST_SCHEMA,
                        "payload_format": self.payload_format,
                        "counts": self.counts,
                    }
                )
                + "\n"
            )
            for entry in self.entries:
                fh.write(_canonical(entry.to_json()) + "\n")

    @classmethod
    def read(cls, path: str | Path) -> "DatasetManifest":
        path = Path(path)
        with path.open("r", encoding="utf-8") as fh:
            lines = [line for line in fh.read().splitlines() if line.strip()]
        if not lines:
            raise ManifestError(f"{path}: empty manifest")
        header = json.loads(lines[0])
        if header.get("schema") != MANIFEST_SCHEMA:
            raise ManifestError(f"{path}: unsupported schema {header.get('schema')!r}")
        manifest = cls(
            entries=[ManifestEntry.from_json(json.loads(line)) for line in lines[1:]],
            payload_format=header.get("payload_format", "npy"),
        )
        manifest.validate()
        declared = {k: int(v) for k, v in header.get("counts", {}).items()}
        if declared and declared != manifest.counts:
            raise ManifestError(f"{path}: header counts {declared} != entries {manifest.counts}")
        return manifest


def save_segment_payload(frames: np.ndarray, root: str | Path, locator: str, payload_format: str) -> None:
    """Write one segment's frames (16,112,112,3 uint8) under the manifest root."""
    target = Path(root) / locator
    if payload_format == "npy":
        target.parent.mkdir(parents=True, exist_ok=True)
        np.save(target, frames)
    elif payload_format == "png":
        target.mkdir(parents=True, exist_ok=True)
        for t in range(frames.shape[0]):
            cv2.imwrite(str(target / f"{t:02d}.png"), frames[t][:, :, ::-1])
    else:
        raise ManifestError(f"unknown payload format {payload_format!r}")


def load_segment_payload(root: str | Path, entry: ManifestEntry, payload_format: str) -> np.ndarray:
    path = Path(root) / entry.payload
    if payload_format == "npy":
        if not path.suffix:
            path = path.with_suffix(".npy")
        return np.load(path)
    if payload_format == "png":
        frames = [
            cv2.imread(str(p), cv2.IMREAD_COLOR)[:, :, ::-1]
            for p in sorted(path.glob("*.png"))
        ]
        return np.stack(frames).astype(np.uint8)
    raise ManifestError(f"unknown payload format {payload_format!r}")


def save_events(doc: EventDocument, path: str | Path) -> None:
    Path(path).write_text(json.dumps(doc.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_events(path: str | Path) -> EventDocument:
    return EventDocument.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
