"""Analytic-vs-numeric gradient verification for the 3D CNN."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn as nn

from .model import C3Dsbd, C3DsbdConfig, init_weights

# small enough that central differences over hundreds of parameters stay cheap
REDUCED_CONFIG = C3DsbdConfig(num_classes=3, conv_filters=(4, 4, 6, 6, 4), fc_width=16)


@dataclass
class GradcheckReport:
    max_rel_error: float
    tolerance: float
    num_params_checked: int
    passed: bool
    worst: list[dict] = field(default_factory=list)


def _rel_error(analytic: float, numeric: float, floor: float = 1e-7) -> float:
    scale = max(abs(analytic), abs(numeric))
    if scale < floor:
        return 0.0
    return abs(analytic - numeric) / scale


def gradcheck(
    config: C3DsbdConfig | None = None,
    tolerance: float = 1e-4,
    num_params: int = 200,
    seed: int = 0,
    step: float = 1e-5,
    batch_size: int = 2,
    corrupt: bool = False,
) -> GradcheckReport:
    """Compare autograd gradients against central finite differences in float64.

    Samples num_params parameters across all tensors. The step is kept small so
    the centered difference does not straddle ReLU/max-pool kinks. `corrupt`
    perturbs one analytic gradient before comparison (self-test of the detector).
    """
    config = config or REDUCED_CONFIG
    torch.manual_seed(int(seed))
    model = C3Dsbd(config).double()
    init_weights(model, seed)
    model.eval()  # dropout off; normalization uses fixed running statistics

    rng = np.random.default_rng(int(seed))
    x = torch.from_numpy(rng.standard_normal((batch_size, 3, 16, 112, 112))).double()
    y = torch.from_numpy(rng.integers(0, config.num_classes, batch_size)).long()
    criterion = nn.CrossEntropyLoss()

    def loss_value() -> torch.Tensor:
        return criterion(model(x)["logits"], y)

    loss = loss_value()
    model.zero_grad()
    loss.backward()

    params = [p for p in model.parameters() if p.requires_grad]
    sizes = np.array([p.numel() for p in params])
    flat_ids = rng.choice(int(sizes.sum()), size=min(num_params, int(sizes.sum())), replace=False)
    bounds = np.cumsum(sizes)

    records = []
    with torch.no_grad():
        for k, flat in enumerate(sorted(int(i) for i in flat_ids)):
            tensor_idx = int(np.searchsorted(bounds, flat, side="right"))
            offset = flat - (int(bounds[tensor_idx - 1]) if tensor_idx else 0)
            p = params[tensor_idx]
            analytic = float(p.grad.view(-1)[offset])
            if corrupt and k == 0:
                analytic += 0.5
            original = float(p.view(-1)[offset])
            p.view(-1)[offset] = original + step
            up = float(loss_value())
            p.view(-1)[offset] = original - step
            down = float(loss_value())
            p.view(-1)[offset] = original
            numeric = (up - down) / (2.0 * step)
            records.append(
                {
                    "param": tensor_idx,
                    "offset": int(offset),
                    "analytic": analytic,
                    "numeric": numeric,
                    "rel_error": _rel_error(analytic, numeric),
                }
            )

    records.sort(key=lambda r: -r["rel_error"])
    max_rel = records[0]["rel_error"] if records else 0.0
    return GradcheckReport(
        max_rel_error=max_rel,
        tolerance=tolerance,
        num_params_checked=len(records),
        passed=max_rel < tolerance,
        worst=records[:5],
    )
