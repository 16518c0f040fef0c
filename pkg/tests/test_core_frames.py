from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbdkit.core.frames import (
    center_crop_frame,
    open_frame_source,
    resize_frame,
    window_starts,
    window_video,
)
from sbdkit.core.types import (
    EmptySourceError,
    ShapeError,
    SourceOpenError,
)

from conftest import procedural_shot, write_image_dir, write_video


def reference_bilinear(frame: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Independent per-pixel bilinear reference (corner-aligned sampling)."""
    h, w = frame.shape[:2]
    out = np.zeros((out_h, out_w, 3), dtype=np.uint8)
    for i in range(out_h):
        y = i * (h - 1) / (out_h - 1) if out_h > 1 else 0.0
        y0 = int(np.floor(y))
        y1 = min(y0 + 1, h - 1)
        wy = y - y0
        for j in range(out_w):
            x = j * (w - 1) / (out_w - 1) if out_w > 1 else 0.0
            x0 = int(np.floor(x))
            x1 = min(x0 + 1, w - 1)
            wx = x - x0
            for c in range(3):
                p00 = float(frame[y0, x0, c])
                p01 = float(frame[y0, x1, c])
                p10 = float(frame[y1, x0, c])
                p11 = float(frame[y1, x1, c])
                top = p00 * (1.0 - wx) + p01 * wx
                bottom = p10 * (1.0 - wx) + p11 * wx
                out[i, j, c] = round(top * (1.0 - wy) + bottom * wy)
    return out


class TestOpenFrameSource:
    def test_directory_of_pngs(self, tmp_path):
        frames = procedural_shot(100, seed=3, size=(48, 64))
        write_image_dir(tmp_path / "d", frames)
        src = open_frame_source(str(tmp_path / "d"))
        assert src.frame_count == 100
        assert src.dimensions == (64, 48)
        np.testing.assert_array_equal(src.read(17), frames[17])

    def test_empty_directory(self, tmp_path):
        (tmp_path / "empty").mkdir()
        with pytest.raises(EmptySourceError):
            open_frame_source(str(tmp_path / "empty"))

    def test_missing_path(self, tmp_path):
        with pytest.raises(SourceOpenError):
            open_frame_source(str(tmp_path / "nope.avi"))

    def test_video_file(self, tmp_path):
        frames = procedural_shot(60, seed=4, size=(48, 64))
        path = write_video(tmp_path / "v.avi", frames)
        src = open_frame_source(str(path))
        assert src.frame_count == 60
        assert src.dimensions == (64, 48)
        assert src.fps == pytest.approx(25.0)
        # MJPG is lossy; content should still be close and deterministic
        a = src.read(30)
        b = open_frame_source(str(path)).read(30)
        np.testing.assert_array_equal(a, b)
        assert np.mean(np.abs(a.astype(int) - frames[30].astype(int))) < 10

    def test_video_random_access_matches_sequential(self, tmp_path):
        frames = procedural_shot(40, seed=5, size=(48, 64))
        path = write_video(tmp_path / "v.avi", frames)
        src = open_frame_source(str(path))
        sequential = [src.read(i) for i in range(40)]
        jumped = src.read(25)
        np.testing.assert_array_equal(jumped, sequential[25])

    def test_numeric_ordering(self, tmp_path):
        d = tmp_path / "d"
        d.mkdir()
        import cv2

        for i in [0, 1, 2, 10, 11]:  # lexicographic order would put 10 before 2
            cv2.imwrite(str(d / f"f{i}.png"), np.full((8, 8, 3), i, np.uint8))
        src = open_frame_source(str(d))
        values = [int(src.read(k)[0, 0, 0]) for k in range(5)]
        assert values == [0, 1, 2, 10, 11]


class TestResizeFrame:
    def test_identity(self):
        frame = procedural_shot(1, seed=6, size=(112, 112))[0]
        out = resize_frame(frame)
        np.testing.assert_array_equal(out, frame)

    def test_constant_color_preserved(self):
        frame = np.full((224, 224, 3), (13, 200, 77), dtype=np.uint8)
        out = resize_frame(frame)
        assert out.shape == (112, 112, 3)
        assert (out == np.array([13, 200, 77], dtype=np.uint8)).all()

    def test_against_reference_113x111(self):
        rng = np.random.default_rng(7)
        frame = rng.integers(0, 256, size=(113, 111, 3), dtype=np.uint8)
        out = resize_frame(frame)
        assert out.shape == (112, 112, 3)
        ref = reference_bilinear(frame, 112, 112)
        np.testing.assert_array_equal(out, ref)
        # corners must equal source corners exactly
        for (oy, ox), (sy, sx) in [
            ((0, 0), (0, 0)),
            ((0, 111), (0, 110)),
            ((111, 0), (112, 0)),
            ((111, 111), (112, 110)),
        ]:
            np.testing.assert_array_equal(out[oy, ox], frame[sy, sx])

    def test_upsampling_against_reference(self):
        rng = np.random.default_rng(8)
        frame = rng.integers(0, 256, size=(5, 9, 3), dtype=np.uint8)
        np.testing.assert_array_equal(resize_frame(frame, (16, 12)), reference_bilinear(frame, 16, 12))

    def test_non_three_channel_rejected(self):
        with pytest.raises(ShapeError):
            resize_frame(np.zeros((10, 10), dtype=np.uint8))
        with pytest.raises(ShapeError):
            resize_frame(np.zeros((10, 10, 4), dtype=np.uint8))

    def test_center_crop(self):
        frame = procedural_shot(1, seed=9, size=(130, 240))[0]
        out = center_crop_frame(frame)
        assert out.shape == (112, 112, 3)


def enumerate_starts(frame_count: int) -> list[int]:
    """Independent oracle: starts 8*i while the window adds >= 1 fresh real frame."""
    starts = []
    covered = -1
    i = 0
    while True:
        start = 8 * i
        if start >= frame_count:
            break
        fresh = max(start, covered + 1)
        if fresh > min(start + 15, frame_count - 1):
            break
        starts.append(start)
        covered = start + 15
        i += 1
    return starts


class TestWindowing:
    @pytest.mark.parametrize(
        "frame_count,expected",
        [(32, [0, 8, 16]), (16, [0]), (20, [0, 8]), (1, [0]), (17, [0, 8])],
    )
    def test_start_examples(self, frame_count, expected):
        assert window_starts(frame_count) == expected
        assert enumerate_starts(frame_count) == expected

    def test_paper_scale_frame_count(self):
        assert window_starts(102400) == enumerate_starts(102400)

    @given(st.integers(min_value=1, max_value=600))
    @settings(max_examples=200, deadline=None)
    def test_starts_match_oracle_and_cover(self, frame_count):
        starts = window_starts(frame_count)
        assert starts == enumerate_starts(frame_count)
        covered = set()
        for s in starts:
            covered.update(range(s, min(s + 16, frame_count)))
        assert covered == set(range(frame_count))
        for a, b in zip(starts, starts[1:]):
            assert b - a == 8  # consecutive windows share exactly 8 frames

    def test_padding_repeats_last_frame(self, tmp_path):
        frames = procedural_shot(20, seed=11, size=(50, 70))
        write_image_dir(tmp_path / "d", frames)
        src = open_frame_source(str(tmp_path / "d"))
        segments = window_video(src)
        assert [s.start_frame for s in segments] == [0, 8]
        assert segments[1].origin["pad"] == 4
        tail = segments[1].frames
        for k in range(12, 16):  # frames 20..23 are repeats of frame 19
            np.testing.assert_array_equal(tail[k], tail[11])

    def test_windowing_deterministic(self, image_dir_source):
        src, _ = image_dir_source
        a = window_video(src)
        b = window_video(src)
        assert len(a) == len(b)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x.frames, y.frames)

    def test_segment_shape_and_dtype(self, image_dir_source):
        src, _ = image_dir_source
        for seg in window_video(src):
            assert seg.frames.shape == (16, 112, 112, 3)
            assert seg.frames.dtype == np.uint8
            assert seg.label is None
