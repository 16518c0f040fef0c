from __future__ import annotations

import numpy as np
import pytest

from sbdkit.core.frames import ImageDirectorySource
from sbdkit.core.types import DomainError, TransitionEvent
from sbdkit.pipeline.postprocess import (
    PostProcessConfig,
    bhattacharyya_distance,
    bhattacharyya_filter,
    color_histogram,
    localize_sharp,
)

from conftest import procedural_shot, write_image_dir


class TestBhattacharyyaDistance:
    def test_identical_histograms_zero(self):
        h = np.array([0.25, 0.25, 0.5])
        assert bhattacharyya_distance(h, h) == pytest.approx(0.0, abs=1e-12)

    def test_disjoint_support_one(self):
        assert bhattacharyya_distance(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 1.0

    def test_half_overlap_value(self):
        # sqrt(1 - sqrt(0.5)) = 0.5412 (direct evaluation of the formula)
        d = bhattacharyya_distance(np.array([0.5, 0.5]), np.array([1.0, 0.0]))
        assert d == pytest.approx(0.54120, abs=5e-5)
        assert d >= 0.2  # kept at the default threshold

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            bhattacharyya_distance(np.ones(3) / 3, np.ones(4) / 4)

    def test_independent_numpy_histogram_agrees(self):
        # cv2-backed histogram vs a straight numpy histogramdd on the same frame
        rng = np.random.default_rng(0)
        frame = rng.integers(0, 256, (40, 40, 3), dtype=np.uint8)
        config = PostProcessConfig(color_space="rgb", bins=(8, 8, 8))
        ours = color_histogram(frame, config)
        ref, _ = np.histogramdd(
            frame.reshape(-1, 3).astype(np.float64),
            bins=(8, 8, 8),
            range=((0, 256), (0, 256), (0, 256)),
        )
        np.testing.assert_allclose(ours, ref.ravel() / ref.sum(), atol=1e-12)


class TestBhattacharyyaFilter:
    def _source(self, tmp_path, frames):
        return ImageDirectorySource(str(write_image_dir(tmp_path / "src", frames)))

    def test_static_event_dropped(self, tmp_path):
        frames = np.repeat(procedural_shot(1, seed=1, size=(60, 60)), 40, axis=0)
        src = self._source(tmp_path, frames)
        event = TransitionEvent("gradual", 5, 30)
        assert bhattacharyya_filter(event, src) is False  # d = 0 -> drop

    def test_real_transition_kept(self, tmp_path):
        a = procedural_shot(20, seed=2, size=(60, 60))
        b = procedural_shot(20, seed=9, size=(60, 60))
        src = self._source(tmp_path, np.concatenate([a, b]))
        event = TransitionEvent("gradual", 10, 30)
        assert bhattacharyya_filter(event, src) is True

    def test_threshold_monotonicity(self, tmp_path):
        rng = np.random.default_rng(3)
        frames = np.concatenate(
            [procedural_shot(12, seed=int(s), size=(60, 60)) for s in rng.integers(0, 50, 8)]
        )
        src = self._source(tmp_path, frames)
        events = [TransitionEvent("gradual", int(s), int(s) + 10) for s in range(0, 80, 10)]
        kept_counts = []
        for threshold in np.linspace(0.0, 1.0, 20):
            config = PostProcessConfig(bhattacharyya_threshold=float(threshold))
            kept_counts.append(sum(bhattacharyya_filter(e, src, config) for e in events))
        assert all(a >= b for a, b in zip(kept_counts, kept_counts[1:]))

    def test_threshold_domain(self):
        with pytest.raises(DomainError):
            PostProcessConfig(bhattacharyya_threshold=1.5)
        with pytest.raises(DomainError):
            PostProcessConfig(bins=(1, 8, 8))


class TestLocalizeSharp:
    def test_cut_found_at_exact_pair(self, tmp_path):
        a = procedural_shot(25, seed=4, size=(60, 60))
        b = procedural_shot(25, seed=11, size=(60, 60))
        src = ImageDirectorySource(str(write_image_dir(tmp_path / "src", np.concatenate([a, b]))))
        event = TransitionEvent("sharp", 16, 31)  # merged segment range containing the cut
        out = localize_sharp(event, src)
        assert (out.start_frame, out.end_frame) == (24, 25)
        assert out.score == event.score

    def test_two_frame_range_returns_that_pair(self, tmp_path):
        frames = procedural_shot(10, seed=5, size=(60, 60))
        src = ImageDirectorySource(str(write_image_dir(tmp_path / "src", frames)))
        out = localize_sharp(TransitionEvent("sharp", 3, 4), src)
        assert (out.start_frame, out.end_frame) == (3, 4)

    def test_constant_video_total_function(self, tmp_path):
        frames = np.repeat(procedural_shot(1, seed=6, size=(60, 60)), 20, axis=0)
        src = ImageDirectorySource(str(write_image_dir(tmp_path / "src", frames)))
        out = localize_sharp(TransitionEvent("sharp", 0, 15), src)
        assert out.end_frame == out.start_frame + 1
        assert 0 <= out.start_frame < 15
