"""Optimizer update rules checked by hand evaluation."""

import pytest
import torch

from pathbt.core import LARS, lars_param_groups


def make_param(value):
    p = torch.nn.Parameter(torch.tensor(value, dtype=torch.float64))
    return p


class TestLARS:
    def test_zero_gradient_leaves_params_unchanged(self):
        p = make_param([2.0, -3.0])
        opt = LARS([{"params": [p], "lr": 0.5, "weight_decay": 0.0, "momentum": 0.9, "adapt": True}])
        p.grad = torch.zeros_like(p)
        opt.step()
        assert torch.equal(p.detach(), torch.tensor([2.0, -3.0], dtype=torch.float64))

    def test_scalar_weight_trust_ratio(self):
        # w=2, g=1, wd=0, momentum 0, lr 0.1: trust = 2/1, update = -0.2
        p = make_param([2.0])
        opt = LARS([{"params": [p], "lr": 0.1, "weight_decay": 0.0, "momentum": 0.0, "adapt": True}])
        p.grad = torch.tensor([1.0], dtype=torch.float64)
        opt.step()
        assert abs(float(p.detach()) - 1.8) <= 1e-12

    def test_bias_bypasses_trust_scaling(self):
        p = make_param([2.0])
        opt = LARS([{"params": [p], "lr": 0.0048, "weight_decay": 0.0, "momentum": 0.0, "adapt": False}])
        p.grad = torch.tensor([1.0], dtype=torch.float64)
        opt.step()
        assert abs(float(p.detach()) - (2.0 - 0.0048)) <= 1e-12

    def test_weight_decay_inside_trust_denominator(self):
        # g' = g + wd*w = 1 + 0.5*2 = 2; trust = |2|/|2| = 1; step = lr * 2
        p = make_param([2.0])
        opt = LARS([{"params": [p], "lr": 0.1, "weight_decay": 0.5, "momentum": 0.0, "adapt": True}])
        p.grad = torch.tensor([1.0], dtype=torch.float64)
        opt.step()
        assert abs(float(p.detach()) - (2.0 - 0.1 * 2.0)) <= 1e-12

    def test_non_finite_gradient_rejected(self):
        p = make_param([1.0])
        opt = LARS([{"params": [p], "lr": 0.1, "weight_decay": 0.0, "momentum": 0.0, "adapt": True}])
        p.grad = torch.tensor([float("nan")], dtype=torch.float64)
        with pytest.raises(ValueError, match="non-finite gradient"):
            opt.step()

    def test_momentum_accumulates_unscaled_updates(self):
        p = make_param([4.0])
        opt = LARS([{"params": [p], "lr": 0.1, "weight_decay": 0.0, "momentum": 0.5, "adapt": False}])
        p.grad = torch.tensor([1.0], dtype=torch.float64)
        opt.step()  # buf = 1; p = 4 - 0.1
        assert abs(float(p.detach()) - 3.9) <= 1e-12
        p.grad = torch.tensor([1.0], dtype=torch.float64)
        opt.step()  # buf = 1.5; p = 3.9 - 0.15
        assert abs(float(p.detach()) - 3.75) <= 1e-12


class TestParamGroups:
    def test_biases_and_norms_split_from_weights(self):
        model = torch.nn.Sequential(
            torch.nn.Linear(4, 8), torch.nn.BatchNorm1d(8), torch.nn.Linear(8, 2)
        )
        weights, biases = lars_param_groups(model, lr_weights=0.2, lr_biases=0.0048)
        assert weights["adapt"] and not biases["adapt"]
        assert biases["weight_decay"] == 0.0
        # two linear weight matrices adapt; everything 1-D goes to the flat group
        assert len(weights["params"]) == 2
        assert all(p.ndim <= 1 for p in biases["params"])
