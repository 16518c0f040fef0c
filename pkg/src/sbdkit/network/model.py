"""Spatio-temporal 3D CNN for 16-frame segment classification.

Five 3x3x3 conv layers (96/256/384/384/256 filters at full width), normalization
after the first two, three fully connected layers (2048/2048/num_classes), on
(batch, 3, 16, 112, 112) input. Strides and paddings are not free choices: they
are derived so every intermediate feature map lands on the published reference
dimensions (e.g. conv1 -> 14x55x55, conv2 grows 27 -> 29 via spatial padding 2,
pool5 -> 8x7x7). The derived table travels with every checkpoint.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn as nn

from ..core.types import CLASS_ORDER, LayerError, ShapeError

INPUT_SHAPE = (3, 16, 112, 112)  # (channels, frames, height, width)
FULL_CONV_FILTERS = (96, 256, 384, 384, 256)
FULL_FC_WIDTH = 2048

# kernel/stride/pad per layer, (t, y, x); chosen to reproduce the reference
# feature-map dimensions, including the unusual conv2 spatial growth 27 -> 29
LAYER_TABLE = [
    {"layer": "conv1", "kernel": (3, 3, 3), "stride": (1, 2, 2), "padding": (0, 0, 0)},
    {"layer": "pool1", "kernel": (3, 3, 3), "stride": (1, 2, 2), "padding": (0, 0, 0)},
    {"layer": "conv2", "kernel": (3, 3, 3), "stride": (1, 1, 1), "padding": (1, 2, 2)},
    {"layer": "pool2", "kernel": (3, 3, 3), "stride": (1, 2, 2), "padding": (0, 0, 0)},
    {"layer": "conv3", "kernel": (3, 3, 3), "stride": (1, 1, 1), "padding": (1, 1, 1)},
    {"layer": "conv4", "kernel": (3, 3, 3), "stride": (1, 1, 1), "padding": (1, 1, 1)},
    {"layer": "conv5", "kernel": (3, 3, 3), "stride": (1, 1, 1), "padding": (1, 1, 1)},
    {"layer": "pool5", "kernel": (3, 2, 2), "stride": (1, 2, 2), "padding": (0, 0, 0)},
]

FEATURE_LAYERS = ("fc6", "fc7", "fc8")
TAP_LAYERS = FEATURE_LAYERS + ("conv5",)


@dataclass
class C3DsbdConfig:
    num_classes: int = 3
    conv_filters: tuple[int, int, int, int, int] = FULL_CONV_FILTERS
    fc_width: int = FULL_FC_WIDTH
    dropout: float = 0.5
    normalization: str = "batch_norm"  # or "lrn"
    # "standardized": per-segment zero-mean/unit-variance after the /255 scale;
    # removes the DC component that otherwise dominates early optimization
    input_scale: str = "standardized"

    def __post_init__(self):
        self.conv_filters = tuple(int(f) for f in self.conv_filters)
        if self.num_classes not in (3, 4):
            raise ValueError("num_classes must be 3 or 4")
        if len(self.conv_filters) != 5:
            raise ValueError("conv_filters must list five filter counts")
        if self.normalization not in ("batch_norm", "lrn"):
            raise ValueError("normalization must be batch_norm or lrn")
        if self.input_scale not in ("unit", "standardized"):
            raise ValueError("input_scale must be unit or standardized")

    @property
    def class_names(self) -> tuple[str, ...]:
        return CLASS_ORDER[: self.num_classes]

    def layer_widths(self) -> dict[str, int]:
        return {"fc6": self.fc_width, "fc7": self.fc_width, "fc8": self.num_classes}

    def to_json(self) -> dict:
        return {
            "num_classes": self.num_classes,
            "conv_filters": list(self.conv_filters),
            "fc_width": self.fc_width,
            "dropout": self.dropout,
            "normalization": self.normalization,
            "input_scale": self.input_scale,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "C3DsbdConfig":
        return cls(
            num_classes=int(obj["num_classes"]),
            conv_filters=tuple(obj["conv_filters"]),
            fc_width=int(obj["fc_width"]),
            dropout=float(obj.get("dropout", 0.5)),
            normalization=str(obj.get("normalization", "batch_norm")),
            input_scale=str(obj.get("input_scale", "unit")),
        )


def _norm_layer(kind: str, channels: int) -> nn.Module:
    if kind == "batch_norm":
        return nn.BatchNorm3d(channels)
    return nn.LocalResponseNorm(size=5, alpha=1e-4, beta=0.75, k=2.0)


def _spec(name: str) -> dict:
    return next(row for row in LAYER_TABLE if row["layer"] == name)


class C3Dsbd(nn.Module):
    def __init__(self, config: C3DsbdConfig | None = None):
        super().__init__()
        self.config = config or C3DsbdConfig()
        f1, f2, f3, f4, f5 = self.config.conv_filters
        c = self.config

        def conv(name, cin, cout):
            s = _spec(name)
            return nn.Conv3d(cin, cout, s["kernel"], stride=s["stride"], padding=s["padding"])

        def pool(name):
            s = _spec(name)
            return nn.MaxPool3d(s["kernel"], stride=s["stride"], padding=s["padding"])

        self.conv1 = conv("conv1", 3, f1)
        self.norm1 = _norm_layer(c.normalization, f1)
        self.pool1 = pool("pool1")
        self.conv2 = conv("conv2", f1, f2)
        self.norm2 = _norm_layer(c.normalization, f2)
        self.pool2 = pool("pool2")
        self.conv3 = conv("conv3", f2, f3)
        self.conv4 = conv("conv4", f3, f4)
        self.conv5 = conv("conv5", f4, f5)
        self.pool5 = pool("pool5")
        self.flat_width = f5 * 8 * 7 * 7
        self.fc6 = nn.Linear(self.flat_width, c.fc_width)
        self.fc7 = nn.Linear(c.fc_width, c.fc_width)
        self.fc8 = nn.Linear(c.fc_width, c.num_classes)
        self.drop = nn.Dropout(c.dropout)
        self.relu = nn.ReLU()

    def forward(self, x: torch.Tensor, return_layers: tuple[str, ...] = ()) -> dict:
        """Run the network; returns {"logits": (B, num_classes), "features": {...}}.

        return_layers may name any of fc6, fc7, fc8 (post-activation, pre-dropout)
        or conv5 (post-ReLU response maps).
        """
        if tuple(x.shape[1:]) != INPUT_SHAPE:
            raise ShapeError(f"input shape {tuple(x.shape)}, expected (B,) + {INPUT_SHAPE}")
        for name in return_layers:
            if name not in TAP_LAYERS:
                raise LayerError(f"unknown feature layer {name!r}; choose from {TAP_LAYERS}")
        features: dict[str, torch.Tensor] = {}

        h = self.pool1(self.norm1(self.relu(self.conv1(x))))
        h = self.pool2(self.norm2(self.relu(self.conv2(h))))
        h = self.relu(self.conv3(h))
        h = self.relu(self.conv4(h))
        h = self.relu(self.conv5(h))
        if "conv5" in return_layers:
            features["conv5"] = h
        h = self.pool5(h)
        h = h.flatten(1)
        h = self.relu(self.fc6(h))
        if "fc6" in return_layers:
            features["fc6"] = h
        h = self.drop(h)
        h = self.relu(self.fc7(h))
        if "fc7" in return_layers:
            features["fc7"] = h
        h = self.drop(h)
        logits = self.fc8(h)
        if "fc8" in return_layers:
            features["fc8"] = logits
        return {"logits": logits, "features": features}


def init_weights(model: C3Dsbd, seed: int) -> None:
    """Fan-in-scaled Gaussian init (std = sqrt(2/fan_in), variance-preserving
    under ReLU), zero biases, deterministic under seed."""
    gen = torch.Generator().manual_seed(int(seed))
    for module in model.modules():
        if isinstance(module, (nn.Conv3d, nn.Linear)):
            fan_in = module.weight.shape[1:].numel() if module.weight.dim() > 1 else module.weight.numel()
            std = float(np.sqrt(2.0 / fan_in))
            with torch.no_grad():
                module.weight.copy_(
                    torch.randn(module.weight.shape, generator=gen, dtype=torch.float64).to(module.weight.dtype) * std
                )
                if module.bias is not None:
                    module.bias.zero_()
        elif isinstance(module, nn.BatchNorm3d):
            with torch.no_grad():
                module.weight.fill_(1.0)
                module.bias.zero_()


def segments_to_batch(frames: np.ndarray, dtype: torch.dtype = torch.float32) -> torch.Tensor:
    """(B, 16, 112, 112, 3) uint8 -> (B, 3, 16, 112, 112) float in [0, 1]."""
    if frames.ndim == 4:
        frames = frames[None]
    if frames.ndim != 5 or frames.shape[1:] != (16, 112, 112, 3):
        raise ShapeError(f"expected (B, 16, 112, 112, 3) frames, got {frames.shape}")
    t = torch.from_numpy(np.ascontiguousarray(frames)).to(dtype)
    return t.permute(0, 4, 1, 2, 3).contiguous() / 255.0


def normalize_batch(batch: torch.Tensor, input_scale: str) -> torch.Tensor:
    if input_scale == "unit":
        return batch
    if input_scale == "standardized":
        mean = batch.mean(dim=(1, 2, 3, 4), keepdim=True)
        std = batch.std(dim=(1, 2, 3, 4), keepdim=True).clamp_min(1e-5)
        return (batch - mean) / std
    raise ValueError(f"unknown input scale {input_scale!r}")


def prepare_batch(frames: np.ndarray, input_scale: str = "standardized", dtype: torch.dtype = torch.float32) -> torch.Tensor:
    return normalize_batch(segments_to_batch(frames, dtype), input_scale)


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)
