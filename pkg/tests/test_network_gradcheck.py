from __future__ import annotations

import numpy as np
import torch
import torch.nn as nn

from sbdkit.network.gradcheck import REDUCED_CONFIG, gradcheck
from sbdkit.network.model import C3Dsbd, init_weights


class TestGradcheck:
    def test_reduced_net_passes(self):
        report = gradcheck(tolerance=1e-4, num_params=64, seed=0)
        assert report.passed, report.worst[:2]
        assert report.num_params_checked == 64
        assert report.max_rel_error < 1e-4

    def test_corrupted_gradient_fails(self):
        report = gradcheck(tolerance=1e-4, num_params=16, seed=0, corrupt=True)
        assert not report.passed

    def test_zero_point_stationary(self):
        # zero weights + zero input + uniform target distribution => zero gradients
        model = C3Dsbd(REDUCED_CONFIG).double()
        for p in model.parameters():
            nn.init.zeros_(p)
        model.eval()
        x = torch.zeros(2, 3, 16, 112, 112, dtype=torch.float64)
        target = torch.full((2, 3), 1.0 / 3.0, dtype=torch.float64)
        loss = nn.CrossEntropyLoss()(model(x)["logits"], target)
        loss.backward()
        for name, p in model.named_parameters():
            if "conv" in name and "weight" in name:
                assert float(p.grad.abs().max()) == 0.0, name

    def test_deterministic_under_seed(self):
        a = gradcheck(num_params=8, seed=3)
        b = gradcheck(num_params=8, seed=3)
        assert a.max_rel_error == b.max_rel_error
