"""Linear SVM over network features, plus a no-SVM softmax bypass.

One-vs-rest with per-class weight vectors; liblinear (sklearn's LinearSVC) is
the binary solver. Ties on equal margins break by the fixed class order
(no_transition, gradual, sharp, wipe). Scores are decision margins mapped to
[0, 1] through a logistic squash.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.svm import LinearSVC

from ..core.types import CLASS_ORDER, DomainError, SbdError, ShapeError
from ..network.model import softmax_rows

SVM_SCHEMA = "sbd-svm/1"


class DegeneracyError(SbdError):
    """Fewer than two classes in the training set."""


@dataclass
class SvmConfig:
    c: float = 1.0
    feature_layer: str = "fc8"
    mode: str = "multiclass"  # or "rejection": transition classes only + margin threshold
    reject_threshold: float = 0.0
    seed: int = 0
    max_iter: int = 10000


@dataclass
class SvmModel:
    class_order: tuple[str, ...]
    weights: np.ndarray  # (num classes, feature width)
    biases: np.ndarray  # (num classes,)
    feature_layer: str = "fc8"
    mode: str = "multiclass"
    reject_threshold: float = 0.0
    metadata: dict = field(default_factory=dict)

    @property
    def feature_width(self) -> int:
        return int(self.weights.shape[1])

    def margins(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        if features.ndim == 1:
            features = features[None]
        if features.shape[1] != self.feature_width:
            raise ShapeError(
                f"feature width {features.shape[1]} != model width {self.feature_width}"
            )
        return features @ self.weights.T + self.biases

    def save(self, path: str | Path) -> None:
        blob = {
            "schema": SVM_SCHEMA,
            "class_order": list(self.class_order),
            "weights": self.weights.tolist(),
            "biases": self.biases.tolist(),
            "feature_layer": self.feature_layer,
            "mode": self.mode,
            "reject_threshold": self.reject_threshold,
            "metadata": self.metadata,
        }
        Path(path).write_text(json.dumps(blob, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "SvmModel":
        blob = json.loads(Path(path).read_text(encoding="utf-8"))
        if blob.get("schema") != SVM_SCHEMA:
            raise SbdError(f"{path}: unsupported SVM schema {blob.get('schema')!r}")
        return cls(
            class_order=tuple(blob["class_order"]),
            weights=np.array(blob["weights"], dtype=np.float64),
            biases=np.array(blob["biases"], dtype=np.float64),
            feature_layer=blob.get("feature_layer", "fc8"),
            mode=blob.get("mode", "multiclass"),
            reject_threshold=float(blob.get("reject_threshold", 0.0)),
            metadata=blob.get("metadata", {}),
        )


def _canonical_classes(labels: list[str]) -> tuple[str, ...]:
    present = set(labels)
    unknown = present - set(CLASS_ORDER)
    if unknown:
        raise DomainError(f"unknown labels {sorted(unknown)}")
    return tuple(name for name in CLASS_ORDER if name in present)


def _sigmoid(x: float) -> float:
    return float(1.0 / (1.0 + np.exp(-x)))


def train_svm(features: np.ndarray, labels: list[str], config: SvmConfig | None = None) -> SvmModel:
    """Fit one binary one-vs-rest LinearSVC per class; deterministic under seed."""
    config = config or SvmConfig()
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ShapeError(f"features must be (N, D), got {features.shape}")
    labels = [str(l) for l in labels]
    if len(labels) != features.shape[0]:
        raise ShapeError("one label per feature row required")

    class_order = _canonical_classes(labels)
    if config.mode == "rejection":
        class_order = tuple(c for c in class_order if c != "no_transition")
    if len(class_order) < 2 and config.mode != "rejection":
        raise DegeneracyError(f"need at least two classes, got {class_order}")
    if config.mode == "rejection" and len(class_order) < 1:
        raise DegeneracyError("rejection mode needs at least one transition class")

    y = np.array(labels)
    rows, biases = [], []
    for name in class_order:
        target = (y == name).astype(np.int64)
        if target.min() == target.max():
            raise DegeneracyError(f"class {name!r} is not separable from an empty complement")
        clf = LinearSVC(C=config.c, random_state=config.seed, max_iter=config.max_iter)
        clf.fit(features, target)
        # sklearn orders binary classes [0, 1]; coef_ is the margin of class 1
        rows.append(clf.coef_[0])
        biases.append(clf.intercept_[0])

    model = SvmModel(
        class_order=class_order,
        weights=np.array(rows, dtype=np.float64),
        biases=np.array(biases, dtype=np.float64),
        feature_layer=config.feature_layer,
        mode=config.mode,
        reject_threshold=config.reject_threshold,
        metadata={
            "c": config.c,
            "seed": config.seed,
            "counts": {name: int((y == name).sum()) for name in class_order},
        },
    )
    preds = [label for label, _ in classify_batch(features, model)]
    model.metadata["training_accuracy"] = float(np.mean([p == t for p, t in zip(preds, labels)]))
    return model


def classify_segment(feature: np.ndarray, model: SvmModel) -> tuple[str, float]:
    """Label one feature vector; pure function of (feature, model)."""
    return classify_batch(np.asarray(feature)[None], model)[0]


def classify_batch(features: np.ndarray, model: SvmModel) -> list[tuple[str, float]]:
    margins = model.margins(features)
    out = []
    for row in margins:
        best = int(np.argmax(row))  # first max wins: fixed class-order tie-break
        if model.mode == "rejection" and row[best] < model.reject_threshold:
            out.append(("no_transition", _sigmoid(-float(row[best]))))
        else:
            out.append((model.class_order[best], _sigmoid(float(row[best]))))
    return out


@dataclass
class SoftmaxBypass:
    """fc8-without-SVM configuration: softmax argmax over the logits."""

    class_order: tuple[str, ...]

    @property
    def feature_layer(self) -> str:
        return "fc8"

    def classify(self, logits: np.ndarray) -> list[tuple[str, float]]:
        logits = np.asarray(logits, dtype=np.float64)
        if logits.ndim == 1:
            logits = logits[None]
        if logits.shape[1] != len(self.class_order):
            raise ShapeError(
                f"logit width {logits.shape[1]} != {len(self.class_order)} classes"
            )
        probs = softmax_rows(logits)
        return [
            (self.class_order[int(np.argmax(row))], float(np.max(row))) for row in probs
        ]
