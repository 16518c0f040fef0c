"""Shared fixtures: procedural video content and tiny trained models."""
from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np
import pytest

from sbdkit.core.frames import ImageDirectorySource, open_frame_source
from sbdkit.core.types import TransitionEvent


def procedural_shot(num_frames: int, seed: int, size: tuple[int, int] = (120, 160)) -> np.ndarray:
    """Moving multi-sinusoid texture; distinct seeds give distinct palettes/motion."""
    rng = np.random.default_rng(seed)
    h, w = size
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    base = rng.uniform(50, 205, size=3)
    amp = rng.uniform(25, 45, size=3)
    fx = rng.uniform(0.03, 0.16, size=3)
    fy = rng.uniform(0.03, 0.16, size=3)
    phase = rng.uniform(0, 2 * np.pi, size=3)
    vx = rng.uniform(-3.0, 3.0, size=3)
    vy = rng.uniform(-3.0, 3.0, size=3)
    out = np.empty((num_frames, h, w, 3), dtype=np.uint8)
    for t in range(num_frames):
        for c in range(3):
            wave = np.sin(fx[c] * (xx + vx[c] * t) + fy[c] * (yy + vy[c] * t) + phase[c])
            out[t, :, :, c] = np.clip(base[c] + amp[c] * wave, 0, 255).astype(np.uint8)
    return out


def write_image_dir(path: Path, frames: np.ndarray) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    for i in range(frames.shape[0]):
        cv2.imwrite(str(path / f"{i:06d}.png"), frames[i][:, :, ::-1])
    return path


def write_video(path: Path, frames: np.ndarray, fps: float = 25.0) -> Path:
    h, w = frames.shape[1:3]
    writer = cv2.VideoWriter(str(path), cv2.VideoWriter_fourcc(*"MJPG"), fps, (w, h))
    assert writer.isOpened()
    for i in range(frames.shape[0]):
        writer.write(frames[i][:, :, ::-1])
    writer.release()
    return path


def build_transition_video(
    shots: list[np.ndarray], transitions: list[dict], rng: np.random.Generator
) -> tuple[np.ndarray, list[TransitionEvent]]:
    """Concatenate shots with the requested transitions between them.

    transitions[i] joins shots[i] and shots[i+1]:
      {"kind": "sharp"} or {"kind": "gradual", "n": N}.
    Returns the frames and ground-truth events (frame-accurate).
    """
    frames = [shots[0]]
    events: list[TransitionEvent] = []
    cursor = shots[0].shape[0]
    for spec, nxt in zip(transitions, shots[1:]):
        if spec["kind"] == "sharp":
            events.append(TransitionEvent("sharp", cursor - 1, cursor))
            frames.append(nxt)
            cursor += nxt.shape[0]
        else:
            n = int(spec["n"])
            prev_tail = frames[-1][-n:]
            next_head = nxt[:n]
            draws = np.sort(rng.random(n))[::-1]
            blend = np.stack(
                [
                    np.rint(a * prev_tail[t].astype(np.float64) + (1 - a) * next_head[t].astype(np.float64)).astype(np.uint8)
                    for t, a in enumerate(draws)
                ]
            )
            frames[-1] = frames[-1][:-n]
            events.append(TransitionEvent("gradual", cursor - n, cursor - 1))
            frames.append(blend)
            frames.append(nxt[n:])
            cursor += nxt.shape[0] - n
    return np.concatenate(frames), events


@pytest.fixture()
def image_dir_source(tmp_path):
    frames = procedural_shot(40, seed=1, size=(60, 80))
    root = write_image_dir(tmp_path / "imgdir", frames)
    return open_frame_source(str(root)), frames


@pytest.fixture(scope="session")
def tiny_sources(tmp_path_factory):
    """Three clean procedural shots on disk, opened as FrameSources."""
    root = tmp_path_factory.mktemp("sources")
    sources = []
    for i in range(3):
        frames = procedural_shot(140, seed=100 + i, size=(120, 160))
        path = write_image_dir(root / f"shot{i}", frames)
        sources.append((ImageDirectorySource(str(path)), []))
    return sources


@pytest.fixture(scope="session")
def toy_dataset(tmp_path_factory, tiny_sources):
    """100 segments/class synthetic manifest, shared across training tests."""
    from sbdkit.synthgen.dataset import SynthesisSpec, synthesize_dataset

    out_dir = tmp_path_factory.mktemp("toyset")
    spec = SynthesisSpec(counts={"sharp": 100, "gradual": 100, "none": 100})
    manifest = synthesize_dataset(tiny_sources, spec, seed=17, out_dir=out_dir, workers=2)
    return manifest, out_dir


@pytest.fixture(scope="session")
def toy_checkpoint(toy_dataset):
    """A small network trained on the toy manifest with the default recipe."""
    from sbdkit.network.model import C3DsbdConfig
    from sbdkit.network.train import TrainSchedule, train

    manifest, root = toy_dataset
    config = C3DsbdConfig(num_classes=3, conv_filters=(8, 12, 16, 16, 12), fc_width=32)
    return train(manifest, root, schedule=TrainSchedule(), seed=0, config=config)
