"""Training loop, checkpoint archive, and feature extraction."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn

from ..core.manifest import DatasetManifest, load_segment_payload
from ..core.types import CoverageError, LayerError, SbdError, TransitionLabel
from .model import (
    FEATURE_LAYERS,
    LAYER_TABLE,
    C3Dsbd,
    C3DsbdConfig,
    init_weights,
    prepare_batch,
)

CHECKPOINT_SCHEMA = "c3dsbd-ckpt/1"


@dataclass
class TrainSchedule:
    base_lr: float = 1e-4
    lr_decay: float = 0.1
    decay_every: int = 2  # epochs
    epochs: int = 6
    batch_size: int = 20
    momentum: float = 0.9

    def lr_for_epoch(self, epoch: int) -> float:
        return self.base_lr * self.lr_decay ** (epoch // self.decay_every)

    def to_json(self) -> dict:
        return {
            "base_lr": self.base_lr,
            "lr_decay": self.lr_decay,
            "decay_every": self.decay_every,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "momentum": self.momentum,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TrainSchedule":
        return cls(**{k: obj[k] for k in cls().to_json() if k in obj})


@dataclass
class Checkpoint:
    config: C3DsbdConfig
    state_dict: dict
    schedule: TrainSchedule | None = None
    log: dict | None = None

    def save(self, path: str | Path) -> None:
        torch.save(
            {
                "schema": CHECKPOINT_SCHEMA,
                "config": self.config.to_json(),
                "schedule": self.schedule.to_json() if self.schedule else None,
                "layer_table": LAYER_TABLE,
                "state_dict": self.state_dict,
                "log": self.log or {},
            },
            str(path),
        )

    @classmethod
    def load(cls, path: str | Path) -> "Checkpoint":
        blob = torch.load(str(path), map_location="cpu", weights_only=False)
        if blob.get("schema") != CHECKPOINT_SCHEMA:
            raise SbdError(f"{path}: unsupported checkpoint schema {blob.get('schema')!r}")
        return cls(
            config=C3DsbdConfig.from_json(blob["config"]),
            state_dict=blob["state_dict"],
            schedule=TrainSchedule.from_json(blob["schedule"]) if blob.get("schedule") else None,
            log=blob.get("log", {}),
        )

    def build_model(self) -> C3Dsbd:
        model = C3Dsbd(self.config)
        model.load_state_dict(self.state_dict)
        model.eval()
        return model


class ManifestDataset:
    """Loads (frames, class index) pairs from a dataset manifest on demand."""

    def __init__(
        self,
        manifest: DatasetManifest,
        root: str | Path,
        class_names: tuple[str, ...],
        input_scale: str = "standardized",
    ):
        self.manifest = manifest
        self.root = Path(root)
        self.class_names = class_names
        self.input_scale = input_scale
        self.class_index = {name: i for i, name in enumerate(class_names)}
        self.entries = [e for e in manifest.entries if e.label.value in self.class_index]

    def labels(self) -> np.ndarray:
        return np.array([self.class_index[e.label.value] for e in self.entries], dtype=np.int64)

    def load(self, idx: int) -> np.ndarray:
        return load_segment_payload(self.root, self.entries[idx], self.manifest.payload_format)

    def load_batch(self, indices: np.ndarray) -> torch.Tensor:
        return prepare_batch(np.stack([self.load(int(i)) for i in indices]), self.input_scale)

    def check_coverage(self) -> None:
        present = {e.label.value for e in self.entries}
        missing = [name for name in self.class_names if name not in present]
        if missing:
            raise CoverageError(f"manifest is missing active classes: {missing}")


def _balanced_epoch_order(labels: np.ndarray, num_classes: int, rng: np.random.Generator) -> np.ndarray:
    """Equal segments per class per epoch: subsample each class to the min count."""
    per_class = [np.flatnonzero(labels == c) for c in range(num_classes)]
    floor = min(len(idx) for idx in per_class)
    chosen = np.concatenate([rng.permutation(idx)[:floor] for idx in per_class])
    return rng.permutation(chosen)


def train(
    manifest: DatasetManifest,
    manifest_root: str | Path,
    schedule: TrainSchedule | None = None,
    seed: int = 0,
    config: C3DsbdConfig | None = None,
    device: str = "cpu",
    log_every: int = 0,
) -> Checkpoint:
    """Train from scratch on a manifest; returns a checkpoint with the run log.

    Raises CoverageError when an active class has no segments. Training loss is
    checked for NaN/Inf every step.
    """
    schedule = schedule or TrainSchedule()
    config = config or C3DsbdConfig()
    data = ManifestDataset(manifest, manifest_root, config.class_names, config.input_scale)
    data.check_coverage()

    torch.manual_seed(int(seed))
    rng = np.random.default_rng(int(seed))
    model = C3Dsbd(config).to(device)
    init_weights(model, seed)
    criterion = nn.CrossEntropyLoss()
    optimizer = torch.optim.SGD(model.parameters(), lr=schedule.base_lr, momentum=schedule.momentum)
    labels = data.labels()

    losses: list[float] = []
    lr_per_epoch: list[float] = []
    for epoch in range(schedule.epochs):
        lr = schedule.lr_for_epoch(epoch)
        lr_per_epoch.append(lr)
        for group in optimizer.param_groups:
            group["lr"] = lr
        model.train()
        order = _balanced_epoch_order(labels, config.num_classes, rng)
        for lo in range(0, len(order), schedule.batch_size):
            batch_idx = order[lo : lo + schedule.batch_size]
            x = data.load_batch(batch_idx).to(device)
            y = torch.from_numpy(labels[batch_idx]).to(device)
            optimizer.zero_grad()
            loss = criterion(model(x)["logits"], y)
            loss.backward()
            optimizer.step()
            value = float(loss.detach())
            if not np.isfinite(value):
                raise SbdError(f"training loss became non-finite at step {len(losses)}")
            losses.append(value)
            if log_every and len(losses) % log_every == 0:
                print(f"epoch {epoch} step {len(losses)} lr {lr:g} loss {value:.4f}", flush=True)

    accuracy = _training_accuracy(model, data, labels, schedule.batch_size, device)
    log = {
        "seed": int(seed),
        "loss": losses,
        "lr_per_epoch": lr_per_epoch,
        "final_per_class_accuracy": accuracy,
        "segments_per_class": {
            name: int((labels == i).sum()) for i, name in enumerate(config.class_names)
        },
    }
    return Checkpoint(config=config, state_dict=model.state_dict(), schedule=schedule, log=log)


def _training_accuracy(model, data, labels, batch_size, device) -> dict[str, float]:
    model.eval()
    hits = np.zeros(len(data.class_names))
    totals = np.zeros(len(data.class_names))
    with torch.no_grad():
        for lo in range(0, len(labels), batch_size):
            idx = np.arange(lo, min(lo + batch_size, len(labels)))
            pred = model(data.load_batch(idx).to(device))["logits"].argmax(dim=1).cpu().numpy()
            for p, t in zip(pred, labels[idx]):
                totals[t] += 1
                hits[t] += p == t
    return {
        name: float(hits[i] / totals[i]) if totals[i] else 0.0
        for i, name in enumerate(data.class_names)
    }


def extract_features(
    segments: np.ndarray,
    layer: str,
    checkpoint: Checkpoint,
    batch_size: int = 20,
    device: str = "cpu",
) -> np.ndarray:
    """One feature vector per segment from fc6/fc7/fc8, inference mode (dropout off)."""
    if layer not in FEATURE_LAYERS:
        raise LayerError(f"unknown feature layer {layer!r}; choose from {FEATURE_LAYERS}")
    model = checkpoint.build_model().to(device)
    if segments.ndim == 4:
        segments = segments[None]
    out = []
    with torch.no_grad():
        for lo in range(0, segments.shape[0], batch_size):
            x = prepare_batch(segments[lo : lo + batch_size], checkpoint.config.input_scale).to(device)
            out.append(model(x, return_layers=(layer,))["features"][layer].cpu().numpy())
    return np.concatenate(out, axis=0)
