"""End-to-end detector: windowing -> CNN+SVM labeling -> merging -> post-processing."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import torch

from ..classifier.svm import SoftmaxBypass, SvmModel, classify_batch
from ..core.frames import FrameSource, iter_windows
from ..core.types import (
    SEGMENT_LENGTH,
    SEGMENT_OVERLAP,
    OrderingError,
    TransitionEvent,
    TransitionLabel,
)
from ..network.model import prepare_batch
from ..network.train import Checkpoint
from .postprocess import PostProcessConfig, bhattacharyya_filter, localize_sharp


@dataclass
class SegmentLabeling:
    index: int
    start_frame: int  # multiple of 8
    label: str
    score: float


def merge_labelings(labelings: list[SegmentLabeling]) -> list[TransitionEvent]:
    """Merge maximal runs of identical non-none labels into one event each.

    Event range is [first segment start, last segment end]; score is the max of
    the member scores. Input must be ordered by start frame at stride 8.
    """
    for i, lab in enumerate(labelings):
        if lab.start_frame % SEGMENT_OVERLAP:
            raise OrderingError(f"segment start {lab.start_frame} is not a multiple of {SEGMENT_OVERLAP}")
        if i and lab.start_frame != labelings[i - 1].start_frame + SEGMENT_OVERLAP:
            raise OrderingError(
                f"labelings out of order at index {i}: start {lab.start_frame} "
                f"after {labelings[i - 1].start_frame}"
            )
    events: list[TransitionEvent] = []
    run_start = 0
    for i in range(len(labelings) + 1):
        boundary = i == len(labelings) or labelings[i].label != labelings[run_start].label
        if not boundary:
            continue
        run = labelings[run_start:i]
        if run and run[0].label != TransitionLabel.NO_TRANSITION.value:
            events.append(
                TransitionEvent(
                    label=run[0].label,
                    start_frame=run[0].start_frame,
                    end_frame=run[-1].start_frame + SEGMENT_LENGTH - 1,
                    score=max(l.score for l in run),
                )
            )
        run_start = i
    return events


LabelFn = Callable[[np.ndarray], list[tuple[str, float]]]


def detect_with_labeler(
    source: FrameSource,
    labeler: LabelFn,
    ppconfig: PostProcessConfig | None = None,
    batch_size: int = 20,
    ingest: str = "resize",
    collect_labelings: list | None = None,
) -> list[TransitionEvent]:
    """Detector core with a pluggable per-batch segment labeler (testable without
    a trained model). The public detect() wires in the CNN+SVM labeler."""
    ppconfig = ppconfig or PostProcessConfig()
    labelings: list[SegmentLabeling] = []

    batch_frames: list[np.ndarray] = []
    batch_starts: list[int] = []

    def flush():
        if not batch_frames:
            return
        results = labeler(np.stack(batch_frames))
        base = len(labelings)
        for j, ((label, score), start) in enumerate(zip(results, batch_starts)):
            labelings.append(SegmentLabeling(index=base + j, start_frame=start, label=label, score=score))
        batch_frames.clear()
        batch_starts.clear()

    for sample in iter_windows(source, ingest=ingest):
        batch_frames.append(sample.frames)
        batch_starts.append(sample.start_frame)
        if len(batch_frames) >= batch_size:
            flush()
    flush()
    if collect_labelings is not None:
        collect_labelings.extend(labelings)

    events = merge_labelings(labelings)
    final: list[TransitionEvent] = []
    for event in events:
        end = min(event.end_frame, source.frame_count - 1)
        clipped = TransitionEvent(event.label, event.start_frame, end, event.score)
        if clipped.label is TransitionLabel.SHARP:
            if clipped.end_frame == clipped.start_frame:
                continue  # no frame pair exists; cannot be a cut
            final.append(localize_sharp(clipped, source, ppconfig))
        else:
            if bhattacharyya_filter(clipped, source, ppconfig):
                final.append(clipped)
    for event in final:
        event.validate()
    return final


class Detector:
    """Bundles a checkpoint with a classifier (SVM or softmax bypass)."""

    def __init__(
        self,
        checkpoint: Checkpoint,
        svm: SvmModel | None = None,
        ppconfig: PostProcessConfig | None = None,
        batch_size: int = 20,
        ingest: str = "resize",
        device: str = "cpu",
    ):
        self.checkpoint = checkpoint
        self.model = checkpoint.build_model().to(device)
        self.device = device
        self.svm = svm
        self.bypass = SoftmaxBypass(class_order=checkpoint.config.class_names)
        self.ppconfig = ppconfig or PostProcessConfig()
        self.batch_size = batch_size
        self.ingest = ingest
        if svm is not None and svm.feature_layer not in ("fc6", "fc7", "fc8"):
            raise ValueError(f"unsupported SVM feature layer {svm.feature_layer!r}")

    def label_segments(self, frames: np.ndarray) -> list[tuple[str, float]]:
        """Label a (B, 16, 112, 112, 3) uint8 stack of segments."""
        layer = self.svm.feature_layer if self.svm is not None else "fc8"
        feats = self._features(frames, layer)
        if self.svm is not None:
            return classify_batch(feats, self.svm)
        return self.bypass.classify(feats)

    def _features(self, frames: np.ndarray, layer: str) -> np.ndarray:
        with torch.no_grad():
            x = prepare_batch(frames, self.checkpoint.config.input_scale).to(self.device)
            return self.model(x, return_layers=(layer,))["features"][layer].cpu().numpy()

    def detect(self, source: FrameSource, collect_labelings: list | None = None) -> list[TransitionEvent]:
        return detect_with_labeler(
            source,
            self.label_segments,
            ppconfig=self.ppconfig,
            batch_size=self.batch_size,
            ingest=self.ingest,
            collect_labelings=collect_labelings,
        )


def detect(
    source: FrameSource,
    checkpoint: Checkpoint,
    svm: SvmModel | None = None,
    ppconfig: PostProcessConfig | None = None,
    batch_size: int = 20,
    ingest: str = "resize",
) -> list[TransitionEvent]:
    """Run the full pipeline over a source and return final transition events."""
    return Detector(checkpoint, svm=svm, ppconfig=ppconfig, batch_size=batch_size, ingest=ingest).detect(source)
