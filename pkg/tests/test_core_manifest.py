from __future__ import annotations

import numpy as np
import pytest

from sbdkit.core.manifest import (
    DatasetManifest,
    ManifestEntry,
    load_events,
    load_segment_payload,
    save_events,
    save_segment_payload,
)
from sbdkit.core.types import (
    DomainError,
    EventDocument,
    ManifestError,
    TransitionEvent,
    TransitionLabel,
)


def _entry(i: int, label: str) -> ManifestEntry:
    return ManifestEntry(
        segment_id=f"{label}-{i:06d}",
        payload=f"segments/{label}-{i:06d}.npy",
        label=TransitionLabel.parse(label),
        alpha_schedule={"kind": "none"},
        provenance={"source": "clip0", "start_frame": 8 * i},
    )


class TestManifestRoundTrip:
    def test_round_trip_equality(self, tmp_path):
        manifest = DatasetManifest(
            entries=[_entry(0, "sharp"), _entry(1, "gradual"), _entry(2, "no_transition")],
        )
        path = tmp_path / "manifest.jsonl"
        manifest.write(path)
        loaded = DatasetManifest.read(path)
        assert loaded == manifest
        assert loaded.counts == {"sharp": 1, "gradual": 1, "no_transition": 1}

    def test_schema_header_checked(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"schema":"other/9"}\n')
        with pytest.raises(ManifestError):
            DatasetManifest.read(path)

    def test_duplicate_ids_rejected(self, tmp_path):
        manifest = DatasetManifest(entries=[_entry(0, "sharp"), _entry(0, "sharp")])
        with pytest.raises(ManifestError):
            manifest.write(tmp_path / "m.jsonl")

    def test_count_mismatch_rejected(self, tmp_path):
        manifest = DatasetManifest(entries=[_entry(0, "sharp")])
        path = tmp_path / "m.jsonl"
        manifest.write(path)
        lines = path.read_text().splitlines()
        lines[0] = lines[0].replace('"sharp":1', '"sharp":2')
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ManifestError):
            DatasetManifest.read(path)

    def test_byte_identical_writes(self, tmp_path):
        manifest = DatasetManifest(entries=[_entry(i, "gradual") for i in range(5)])
        manifest.write(tmp_path / "a.jsonl")
        manifest.write(tmp_path / "b.jsonl")
        assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


class TestPayloads:
    @pytest.mark.parametrize("fmt", ["npy", "png"])
    def test_payload_round_trip(self, tmp_path, fmt):
        rng = np.random.default_rng(0)
        frames = rng.integers(0, 256, size=(16, 112, 112, 3), dtype=np.uint8)
        entry = _entry(0, "sharp")
        locator = entry.payload if fmt == "npy" else "segments/sharp-000000"
        save_segment_payload(frames, tmp_path, locator, fmt)
        entry.payload = locator
        out = load_segment_payload(tmp_path, entry, fmt)
        np.testing.assert_array_equal(out, frames)


class TestEventDocuments:
    def test_round_trip(self, tmp_path):
        doc = EventDocument(
            video_id="clip7",
            events=[
                TransitionEvent("sharp", 10, 11, 0.9),
                TransitionEvent("gradual", 40, 52, 0.8),
            ],
        )
        save_events(doc, tmp_path / "events.json")
        assert load_events(tmp_path / "events.json") == doc

    def test_sharp_pair_rule_enforced_on_load(self, tmp_path):
        (tmp_path / "bad.json").write_text(
            '{"video_id": "v", "events": [{"label": "sharp", "start_frame": 3, "end_frame": 9}]}'
        )
        with pytest.raises(DomainError):
            load_events(tmp_path / "bad.json")

    def test_event_basics_validated(self):
        with pytest.raises(DomainError):
            TransitionEvent("gradual", 9, 3)
        with pytest.raises(DomainError):
            TransitionEvent("no_transition", 0, 5)
        with pytest.raises(DomainError):
            TransitionEvent("gradual", 0, 5, score=1.5)

    def test_label_alias_none(self):
        assert TransitionLabel.parse("none") is TransitionLabel.NO_TRANSITION
