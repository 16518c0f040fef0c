from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbdkit.core.types import DomainError, ShapeError
from sbdkit.synthgen.composite import composite, composite_clip
from sbdkit.synthgen.schedules import make_dissolve_schedule


def composite_reference(b: np.ndarray, f: np.ndarray, alpha) -> np.ndarray:
    """Scalar-loop oracle: round(alpha*B + (1-alpha)*F) per pixel."""
    h, w, _ = b.shape
    out = np.zeros_like(b)
    for i in range(h):
        for j in range(w):
            a = float(alpha[i, j]) if isinstance(alpha, np.ndarray) else float(alpha)
            for c in range(3):
                out[i, j, c] = round(a * float(b[i, j, c]) + (1.0 - a) * float(f[i, j, c]))
    return out


class TestComposite:
    def test_alpha_one_is_b(self):
        rng = np.random.default_rng(0)
        b = rng.integers(0, 256, (20, 30, 3), dtype=np.uint8)
        f = rng.integers(0, 256, (20, 30, 3), dtype=np.uint8)
        np.testing.assert_array_equal(composite(b, f, 1.0), b)

    def test_alpha_zero_is_f(self):
        rng = np.random.default_rng(1)
        b = rng.integers(0, 256, (20, 30, 3), dtype=np.uint8)
        f = rng.integers(0, 256, (20, 30, 3), dtype=np.uint8)
        np.testing.assert_array_equal(composite(b, f, 0.0), f)

    def test_midpoint_value(self):
        b = np.full((4, 4, 3), 200, np.uint8)
        f = np.full((4, 4, 3), 100, np.uint8)
        assert (composite(b, f, 0.5) == 150).all()

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            composite(np.zeros((4, 4, 3), np.uint8), np.zeros((4, 5, 3), np.uint8), 0.5)

    def test_alpha_domain(self):
        frame = np.zeros((4, 4, 3), np.uint8)
        with pytest.raises(DomainError):
            composite(frame, frame, 1.5)
        with pytest.raises(DomainError):
            composite(frame, frame, np.full((4, 4), 2.0))

    def test_matte_shape_checked(self):
        frame = np.zeros((4, 4, 3), np.uint8)
        with pytest.raises(ShapeError):
            composite(frame, frame, np.full((5, 4), 0.5))

    @given(
        seed=st.integers(min_value=0, max_value=2**31 - 1),
        scalar=st.booleans(),
    )
    @settings(max_examples=60, deadline=None)
    def test_exactness_against_scalar_oracle(self, seed, scalar):
        rng = np.random.default_rng(seed)
        b = rng.integers(0, 256, (7, 9, 3), dtype=np.uint8)
        f = rng.integers(0, 256, (7, 9, 3), dtype=np.uint8)
        alpha = float(rng.random()) if scalar else rng.random((7, 9))
        np.testing.assert_array_equal(composite(b, f, alpha), composite_reference(b, f, alpha))

    def test_fade_halves_intensity_at_half_alpha(self):
        rng = np.random.default_rng(2)
        live = rng.integers(0, 256, (12, 12, 3), dtype=np.uint8)
        black = np.zeros_like(live)
        out = composite(live, black, 0.5)  # fade-out midpoint
        assert np.abs(out.astype(int) - np.rint(live / 2).astype(int)).max() <= 1


class TestCompositeClip:
    def test_dissolve_clip_monotone_toward_f(self):
        rng = np.random.default_rng(3)
        b = np.full((16, 8, 8, 3), 220, np.uint8)
        f = np.full((16, 8, 8, 3), 20, np.uint8)
        sched = make_dissolve_schedule(10, rng)
        out = composite_clip(b, f, sched)
        means = out.reshape(16, -1).mean(axis=1)
        assert (np.diff(means) <= 0).all()
        assert means[0] == 220 and means[-1] == 20

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            composite_clip(
                np.zeros((10, 8, 8, 3), np.uint8),
                np.zeros((10, 8, 8, 3), np.uint8),
                make_dissolve_schedule(4, np.random.default_rng(0)),
            )
