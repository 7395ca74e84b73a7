"""Feature-extractor registry: a desk-scale conv net plus full-size families."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import torch
import torch.nn as nn

SMALL_CONV_DIM = 128
RESIDUAL50_DIM = 2048
HIER_WINDOW_TINY_DIM = 768

FAMILY_ALIASES = {
    "small_conv": "small_conv",
    "residual50_class": "residual50_class",
    "rn50class": "residual50_class",
    "hier_window_transformer_tiny_class": "hier_window_transformer_tiny_class",
    "swintclass": "hier_window_transformer_tiny_class",
}

FAMILY_DIMS = {
    "small_conv": SMALL_CONV_DIM,
    "residual50_class": RESIDUAL50_DIM,
    "hier_window_transformer_tiny_class": HIER_WINDOW_TINY_DIM,
}


@dataclass
class EncoderSpec:
    family: str = "small_conv"
    init: str = "random"
    feature_dim: int | None = None
    weights_path: str | None = None

    def __post_init__(self):
        if self.family not in FAMILY_ALIASES:
            raise ValueError(f"unknown encoder family {self.family!r}")
        self.family = FAMILY_ALIASES[self.family]
        expected = FAMILY_DIMS[self.family]
        if self.feature_dim is None:
            self.feature_dim = expected
        elif self.feature_dim != expected:
            raise ValueError(
                f"feature_dim {self.feature_dim} does not match {self.family} output width {expected}"
            )
        if self.init not in ("random", "pretrained"):
            raise ValueError(f"init must be random or pretrained, got {self.init!r}")
        if self.init == "pretrained" and not self.weights_path:
            raise ValueError("pretrained init requires a weights_path")


class SmallConvEncoder(nn.Module):
    """Four stride-2 conv stages with batch norm, global average pooled."""

    def __init__(self, feature_dim: int = SMALL_CONV_DIM):
        super().__init__()
        widths = (32, 64, 128, feature_dim)
        layers = []
        in_c = 3
        for w in widths:
            layers += [
                nn.Conv2d(in_c, w, kernel_size=3, stride=2, padding=1, bias=False),
                nn.BatchNorm2d(w),
                nn.ReLU(inplace=True),
            ]
            in_c = w
        self.body = nn.Sequential(*layers)
        self.feature_dim = feature_dim

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.body(x).mean(dim=(2, 3))


def _residual50() -> nn.Module:
    from torchvision.models import resnet50

    net = resnet50(weights=None)
    net.fc = nn.Identity()
    net.feature_dim = RESIDUAL50_DIM
    return net


def _hier_window_tiny() -> nn.Module:
    from torchvision.models import swin_t

    net = swin_t(weights=None)
    net.head = nn.Identity()
    net.feature_dim = HIER_WINDOW_TINY_DIM
    return net


def encoder_registry(spec: EncoderSpec, seed: int | None = None) -> nn.Module:
    """Build an encoder instance for the spec; loads weights for pretrained init."""
    if seed is not None:
        torch.manual_seed(seed)
    if spec.family == "small_conv":
        net = SmallConvEncoder()
    elif spec.family == "residual50_class":
        net = _residual50()
    elif spec.family == "hier_window_transformer_tiny_class":
        net = _hier_window_tiny()
    else:  # pragma: no cover - guarded by EncoderSpec
        raise ValueError(f"unknown encoder family {spec.family!r}")
    if spec.init == "pretrained":
        path = Path(spec.weights_path)
        if not path.exists():
            raise FileNotFoundError(f"encoder weights file not found: {path}")
        state = torch.load(path, map_location="cpu", weights_only=True)
        if isinstance(state, dict) and "encoder" in state:
            state = state["encoder"]
        net.load_state_dict(state)
    return net
