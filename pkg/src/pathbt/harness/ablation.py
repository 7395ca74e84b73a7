"""Single-axis sweeps over pretraining hyperparameters and transforms."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..augment.policy import AugmentationPolicy, TransformSpec, builtin_policies
from ..core.encoders import EncoderSpec
from ..core.pretrain import BTConfig, pretrain
from ..probe.linear import ProbeConfig
from .matrix import probe_encoder

logger = logging.getLogger(__name__)

ABLATION_AXES = (
    "batch_size",
    "lambda",
    "projector_dim",
    "transform_toggle",
    "crop_asymmetry",
    "posterize_bits",
    "rotation_angle",
)

STRUCTURAL = ("crop_resize", "normalize")


def policy_is_degenerate(policy: AugmentationPolicy) -> bool:
    """True when both views are always identical (collapse risk)."""
    for branch in (policy.branch_a, policy.branch_b):
        if any(s.kind not in STRUCTURAL for s in branch):
            return False
        lo, hi = branch[-2].params.get("scale_range", (0.08, 1.0))
        if lo != hi or hi != 1.0:
            return False
    return True


def _strip_kinds(branch, kinds) -> list[TransformSpec]:
    return [s for s in branch if s.kind not in kinds]


def _set_param(branch, kind: str, **updates) -> list[TransformSpec]:
    out = []
    for s in branch:
        if s.kind == kind:
            params = dict(s.params)
            params.update(updates)
            out.append(TransformSpec(kind, s.probability, params))
        else:
            out.append(s)
    return out


def _ensure_spec(branch, spec: TransformSpec) -> list[TransformSpec]:
    if any(s.kind == spec.kind for s in branch):
        return _set_param(branch, spec.kind, **spec.params)
    # insert before the structural tail
    return branch[:-2] + [spec] + branch[-2:]


def apply_axis(policy: AugmentationPolicy, config: BTConfig, axis: str, value):
    """Derive the (policy, config) pair for one sweep value."""
    if axis == "batch_size":
        return policy, replace(config, batch_size=int(value))
    if axis == "lambda":
        return policy, replace(config, lam=float(value))
    if axis == "projector_dim":
        dims = tuple(int(value) for _ in config.projector_dims)
        return policy, replace(config, projector_dims=dims)
    if axis == "rotation_angle":
        a = _set_param(policy.branch_a, "rotate", max_degrees=float(value))
        b = _set_param(policy.branch_b, "rotate", max_degrees=float(value))
        return AugmentationPolicy(f"{policy.name}-rot{value}", a, b), config
    if axis == "posterize_bits":
        spec = TransformSpec("posterize", 0.2, {"bits": int(value)})
        b = _ensure_spec(policy.branch_b, spec)
        return AugmentationPolicy(f"{policy.name}-post{value}", list(policy.branch_a), b), config
    if axis == "crop_asymmetry":
        scale = float(value)
        b = _set_param(policy.branch_b, "crop_resize", scale_range=[scale, scale])
        return AugmentationPolicy(f"{policy.name}-crop{value}", list(policy.branch_a), b), config
    if axis == "transform_toggle":
        if value == "all":
            a = _strip_kinds(policy.branch_a, set(k for k in _kinds(policy.branch_a)) - set(STRUCTURAL))
            a = _set_param(a, "crop_resize", scale_range=[1.0, 1.0])
            b = _strip_kinds(policy.branch_b, set(k for k in _kinds(policy.branch_b)) - set(STRUCTURAL))
            b = _set_param(b, "crop_resize", scale_range=[1.0, 1.0])
        else:
            a = _strip_kinds(policy.branch_a, {value})
            b = _strip_kinds(policy.branch_b, {value})
        toggled = AugmentationPolicy(f"{policy.name}-no_{value}", a, b)
        if policy_is_degenerate(toggled):
            raise ValueError(
                f"transform_toggle {value!r} leaves identical views: degenerate policy, collapse risk"
            )
        return toggled, config
    raise ValueError(f"unknown ablation axis {axis!r} (valid: {ABLATION_AXES})")


def _kinds(branch):
    return [s.kind for s in branch]


@dataclass
class AblationRow:
    axis: str
    value: object
    top1_mean: float
    top1_std: float
    auc_mean: float
    auc_std: float
    loss_variance_mean: float


@dataclass
class AblationReport:
    axis: str
    rows: list[AblationRow] = field(default_factory=list)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(
                ["axis", "value", "top1_mean", "top1_std", "auc_mean", "auc_std", "loss_variance_mean"]
            )
            for r in self.rows:
                writer.writerow(
                    [r.axis, r.value, r.top1_mean, r.top1_std, r.auc_mean, r.auc_std, r.loss_variance_mean]
                )

    def to_bar_png(self, path: str | Path) -> None:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(6, 4))
        xs = np.arange(len(self.rows))
        ax.bar(xs, [r.top1_mean for r in self.rows], yerr=[r.top1_std for r in self.rows], capsize=4)
        ax.set_xticks(xs)
        ax.set_xticklabels([str(r.value) for r in self.rows])
        ax.set_xlabel(self.axis)
        ax.set_ylabel("top-1 accuracy (%)")
        ax.set_title(f"influence of {self.axis}")
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)


def balanced_subset(labels, per_class: int, rng: np.random.Generator) -> np.ndarray:
    labels = np.asarray(labels)
    idx = []
    for c in np.unique(labels):
        pool = np.flatnonzero(labels == c)
        take = min(per_class, len(pool))
        idx.extend(rng.choice(pool, size=take, replace=False))
    return np.asarray(sorted(idx))


def ablation(
    axis: str,
    values,
    images,
    labels,
    policy: AugmentationPolicy | None = None,
    encoder_spec: EncoderSpec | None = None,
    bt_config: BTConfig | None = None,
    probe_config: ProbeConfig | None = None,
    seeds: tuple[int, ...] = (0, 1),
    subset_per_class: int = 500,
    out_dir: str | Path | None = None,
    input_size: int | None = None,
) -> AblationReport:
    """One pretrain+probe per (value, seed) on a balanced subset; mean +/- std."""
    if axis not in ABLATION_AXES:
        raise ValueError(f"unknown ablation axis {axis!r} (valid: {ABLATION_AXES})")
    if not values:
        raise ValueError("values must be nonempty")
    policy = policy or builtin_policies(64)["pathbt"]
    encoder_spec = encoder_spec or EncoderSpec()
    bt_config = bt_config or BTConfig(batch_size=64, projector_dims=(256, 256), epochs=5)
    probe_config = probe_config or ProbeConfig(epochs=40, train_per_class=100, test_per_class=50)

    labels = np.asarray(labels)
    subset = balanced_subset(labels, subset_per_class, np.random.default_rng(bt_config.seed))
    sub_images = [images[i] for i in subset]
    sub_labels = labels[subset]

    report = AblationReport(axis=axis)
    for value in values:
        run_policy, run_config = apply_axis(policy, bt_config, axis, value)
        top1s, aucs, variances = [], [], []
        for seed in seeds:
            cfg = replace(run_config, seed=seed)
            run = pretrain(sub_images, run_policy, encoder_spec, cfg)
            losses = np.asarray(run.loss_history)
            variances.append(float(losses.var()))
            probe = probe_encoder(
                run.encoder, sub_images, sub_labels, replace(probe_config, seed=seed), input_size
            )
            top1s.append(probe.metrics.top1_acc)
            aucs.append(probe.metrics.auc)
        report.rows.append(
            AblationRow(
                axis=axis,
                value=value,
                top1_mean=float(np.mean(top1s)),
                top1_std=float(np.std(top1s)),
                auc_mean=float(np.mean(aucs)),
                auc_std=float(np.std(aucs)),
                loss_variance_mean=float(np.mean(variances)),
            )
        )
        logger.info("ablation %s=%s: top1 %.2f +/- %.2f", axis, value, report.rows[-1].top1_mean, report.rows[-1].top1_std)

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        report.to_csv(out_dir / f"ablation_{axis}.csv")
        report.to_bar_png(out_dir / f"ablation_{axis}.png")
    return report
