"""Layer-wise adaptive rate scaling with a separate flat rate for biases."""

from __future__ import annotations

import torch


class LARS(torch.optim.Optimizer):
    """SGD with per-parameter trust ratios on weight tensors.

    Weight parameters scale their learning rate by ||w|| / ||g + wd * w|| and
    receive weight decay; bias and normalization parameters (``adapt=False``
    groups) use a plain momentum update at their own learning rate with no
    decay and no trust scaling. A zero-norm weight or gradient falls back to
    trust ratio 1.
    """

    def __init__(self, params, lr=0.2, weight_decay=1e-6, momentum=0.9, adapt=True):
        if lr < 0:
            raise ValueError(f"invalid learning rate {lr}")
        defaults = dict(lr=lr, weight_decay=weight_decay, momentum=momentum, adapt=adapt)
        super().__init__(params, defaults)

    @torch.no_grad()
    def step(self, closure=None):
        loss = None
        if closure is not None:
            with torch.enable_grad():
                loss = closure()
        for group in self.param_groups:
            lr = group["lr"]
            wd = group["weight_decay"]
            momentum = group["momentum"]
            adapt = group["adapt"]
            for p in group["params"]:
                if p.grad is None:
                    continue
                g = p.grad
                if not torch.isfinite(g).all():
                    raise ValueError("non-finite gradient")
                if adapt:
                    if wd != 0:
                        g = g.add(p, alpha=wd)
                    w_norm = torch.linalg.vector_norm(p)
                    g_norm = torch.linalg.vector_norm(g)
                    trust = torch.where(
                        (w_norm > 0) & (g_norm > 0), w_norm / g_norm, torch.ones_like(w_norm)
                    )
                    update = g * trust
                else:
                    update = g
                state = self.state[p]
                if momentum != 0:
                    buf = state.get("momentum_buffer")
                    if buf is None:
                        buf = torch.zeros_like(p)
                        state["momentum_buffer"] = buf
                    buf.mul_(momentum).add_(update)
                    update = buf
                p.sub_(update, alpha=lr)
        return loss


def lars_param_groups(
    module: torch.nn.Module,
    lr_weights: float = 0.2,
    lr_biases: float = 0.0048,
    weight_decay: float = 1e-6,
    momentum: float = 0.9,
) -> list[dict]:
    """Split parameters into adaptive weight and flat bias/norm groups.

    One-dimensional parameters (biases, normalization scales) go to the flat
    group, which is excluded from weight decay and trust scaling.
    """
    weights, biases = [], []
    for p in module.parameters():
        if not p.requires_grad:
            continue
        (biases if p.ndim <= 1 else weights).append(p)
    return [
        dict(params=weights, lr=lr_weights, weight_decay=weight_decay, momentum=momentum, adapt=True),
        dict(params=biases, lr=lr_biases, weight_decay=0.0, momentum=momentum, adapt=False),
    ]
