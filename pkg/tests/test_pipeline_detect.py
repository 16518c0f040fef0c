from __future__ import annotations

import numpy as np
import pytest

from sbdkit.core.frames import ImageDirectorySource
from sbdkit.core.types import TransitionLabel
from sbdkit.pipeline.detect import detect_with_labeler
from sbdkit.pipeline.postprocess import PostProcessConfig

from conftest import build_transition_video, procedural_shot, write_image_dir


def oracle_labeler(events):
    """Ground-truth segment labeler: labels a window by the transition it contains."""

    def label_batch(frames: np.ndarray):
        # start frames are recovered from call order by the caller closure below
        raise NotImplementedError

    return label_batch


def make_truth_labeler(events, starts_seen: list):
    """Labels each 16-frame window from generator ground truth (independent of any model)."""
    position = {"next": 0}

    def label_batch(frames: np.ndarray):
        out = []
        for _ in range(frames.shape[0]):
            start = position["next"] * 8
            position["next"] += 1
            starts_seen.append(start)
            window = (start, start + 15)
            hit = None
            for ev in events:
                if min(window[1], ev.end_frame) - max(window[0], ev.start_frame) >= 0:
                    hit = ev
                    break
            out.append((hit.label.value, 0.9) if hit else ("no_transition", 0.6))
        return out

    return label_batch


class TestDetectWithLabeler:
    def _video(self, tmp_path, rng_seed=0, kinds=("gradual",)):
        rng = np.random.default_rng(rng_seed)
        shots = [procedural_shot(64, seed=20 + i, size=(60, 60)) for i in range(len(kinds) + 1)]
        transitions = [
            {"kind": k} if k == "sharp" else {"kind": "gradual", "n": 11} for k in kinds
        ]
        frames, events = build_transition_video(shots, transitions, rng)
        src = ImageDirectorySource(str(write_image_dir(tmp_path / "video", frames)))
        return src, events

    def test_single_dissolve_detected_overlapping_truth(self, tmp_path):
        src, truth = self._video(tmp_path, kinds=("gradual",))
        starts = []
        detected = detect_with_labeler(src, make_truth_labeler(truth, starts), batch_size=7)
        gradual = [e for e in detected if e.label is TransitionLabel.GRADUAL]
        assert len(gradual) == 1
        ev, gt = gradual[0], truth[0]
        assert min(ev.end_frame, gt.end_frame) - max(ev.start_frame, gt.start_frame) >= 0

    def test_no_transition_video_empty(self, tmp_path):
        frames = procedural_shot(100, seed=30, size=(60, 60))
        src = ImageDirectorySource(str(write_image_dir(tmp_path / "flat", frames)))
        detected = detect_with_labeler(src, make_truth_labeler([], []), batch_size=20)
        assert detected == []

    def test_sharp_localized_to_pair(self, tmp_path):
        src, truth = self._video(tmp_path, kinds=("sharp",))
        detected = detect_with_labeler(src, make_truth_labeler(truth, []), batch_size=20)
        sharp = [e for e in detected if e.label is TransitionLabel.SHARP]
        assert len(sharp) == 1
        assert sharp[0].end_frame == sharp[0].start_frame + 1
        assert (sharp[0].start_frame, sharp[0].end_frame) == (
            truth[0].start_frame,
            truth[0].end_frame,
        )

    def test_events_within_source_bounds(self, tmp_path):
        src, truth = self._video(tmp_path, kinds=("gradual", "sharp", "gradual"))
        detected = detect_with_labeler(src, make_truth_labeler(truth, []), batch_size=4)
        for ev in detected:
            assert 0 <= ev.start_frame <= ev.end_frame < src.frame_count
            ev.validate()

    def test_determinism(self, tmp_path):
        src, truth = self._video(tmp_path, kinds=("gradual", "sharp"))
        a = detect_with_labeler(src, make_truth_labeler(truth, []), batch_size=5)
        b = detect_with_labeler(src, make_truth_labeler(truth, []), batch_size=5)
        assert a == b

    def test_low_motion_false_positive_filtered(self, tmp_path):
        # labeler claims gradual everywhere on a static video; filter drops all of it
        frames = np.repeat(procedural_shot(1, seed=31, size=(60, 60)), 80, axis=0)
        src = ImageDirectorySource(str(write_image_dir(tmp_path / "static", frames)))

        def liar(batch):
            return [("gradual", 0.9)] * batch.shape[0]

        detected = detect_with_labeler(src, liar, ppconfig=PostProcessConfig(bhattacharyya_threshold=0.2))
        assert detected == []

    def test_batch_size_does_not_change_result(self, tmp_path):
        src, truth = self._video(tmp_path, kinds=("gradual", "sharp"))
        outs = [
            detect_with_labeler(src, make_truth_labeler(truth, []), batch_size=b)
            for b in (1, 3, 20)
        ]
        assert outs[0] == outs[1] == outs[2]
