"""Training matrices: encoder/strategy grid and cross-FoV transfer."""

from __future__ import annotations

import csv
import logging
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import torch

from ..augment.policy import builtin_policies
from ..core.encoders import FAMILY_ALIASES, EncoderSpec
from ..core.pretrain import BTConfig, pretrain
from ..probe.embeddings import extract_embeddings
from ..probe.linear import ProbeConfig, train_probe
from .supervised import SupervisedConfig, supervised_train

logger = logging.getLogger(__name__)


@dataclass
class MatrixCell:
    name: str
    training: str  # "supervised" or "bt"
    policy: str | None = None  # required for bt cells
    pretrained_init: bool = False
    encoder_family: str = "small_conv"


def default_matrix_cells(
    encoder_family: str = "small_conv",
    transformer_family: str = "hier_window_transformer_tiny_class",
) -> list[MatrixCell]:
    """The five-cell grid: supervised baseline, plain/pretrained/pathology
    two-view training, and the windowed-transformer variant."""
    return [
        MatrixCell("supervised", "supervised", None, True, encoder_family),
        MatrixCell("basic_bt", "bt", "basic", False, encoder_family),
        MatrixCell("im_bt", "bt", "basic", True, encoder_family),
        MatrixCell("path_bt", "bt", "pathbt", True, encoder_family),
        MatrixCell("swin_bt", "bt", "pathbt", True, transformer_family),
    ]


@dataclass
class CellResult:
    model: str
    dataset: str
    status: str  # ok | absent | failed
    top1: float | None = None
    auc: float | None = None
    note: str = ""


@dataclass
class MatrixResult:
    cells: list[CellResult]
    planned: list[tuple[str, str]]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["model", "dataset", "status", "top1_acc", "auc", "note"])
            for c in self.cells:
                writer.writerow([c.model, c.dataset, c.status, c.top1, c.auc, c.note])


def _validate_cells(cells: list[MatrixCell]) -> None:
    policies = builtin_policies(32)
    for cell in cells:
        if cell.training not in ("supervised", "bt"):
            raise ValueError(f"cell {cell.name}: unknown training {cell.training!r}")
        if cell.training == "bt" and cell.policy not in policies:
            raise ValueError(f"cell {cell.name}: unresolvable policy {cell.policy!r}")
        if cell.encoder_family not in FAMILY_ALIASES:
            raise ValueError(f"cell {cell.name}: unknown encoder family {cell.encoder_family!r}")


def probe_encoder(encoder, images, labels, probe_cfg: ProbeConfig, input_size: int | None = None):
    feats = extract_embeddings(encoder, images, input_size=input_size)
    return train_probe(feats, labels, probe_cfg)


def experiment_matrix(
    datasets: dict[str, tuple[list, list]],
    cells: list[MatrixCell] | None = None,
    bt_config: BTConfig | None = None,
    probe_config: ProbeConfig | None = None,
    supervised_config: SupervisedConfig | None = None,
    out_size: int = 64,
    dry_run: bool = False,
    out_csv: str | Path | None = None,
    pretrained_weights: dict[str, str] | None = None,
) -> MatrixResult:
    """Run every (cell, dataset) pair and emit the comparison table.

    All configurations are validated before any run starts. Desk-scale
    "pretrained" initialization reuses the supervised cell's encoder for the
    same family when no explicit weights file is given; cells that cannot run
    are reported as absent with a reason, never dropped.
    """
    cells = cells if cells is not None else default_matrix_cells()
    _validate_cells(cells)
    planned = [(c.name, ds) for c in cells for ds in datasets]
    result = MatrixResult(cells=[], planned=planned)
    if dry_run:
        return result

    bt_config = bt_config or BTConfig(batch_size=64, projector_dims=(256, 256), epochs=5)
    probe_config = probe_config or ProbeConfig(epochs=40, train_per_class=100, test_per_class=50)
    supervised_config = supervised_config or SupervisedConfig(epochs=3)
    policies = builtin_policies(out_size)
    weights_by_family: dict[str, str] = dict(pretrained_weights or {})
    tmp = Path(tempfile.mkdtemp(prefix="pathbt-matrix-"))

    for dataset_name, (images, labels) in datasets.items():
        for cell in cells:
            try:
                note = ""
                if cell.training == "supervised":
                    sup = supervised_train(
                        images, labels, EncoderSpec(family=cell.encoder_family), supervised_config
                    )
                    if cell.encoder_family not in weights_by_family:
                        path = tmp / f"{dataset_name}_{cell.encoder_family}_supervised.pt"
                        torch.save(sup.encoder.state_dict(), path)
                        weights_by_family[cell.encoder_family] = str(path)
                    probe = probe_encoder(sup.encoder, images, labels, probe_config, out_size)
                else:
                    init = "random"
                    weights = weights_by_family.get(cell.encoder_family)
                    if cell.pretrained_init and weights is not None:
                        init = "pretrained"
                    elif cell.pretrained_init:
                        note = "no pretrained weights for family; random init"
                    spec = EncoderSpec(
                        family=cell.encoder_family, init=init, weights_path=weights if init == "pretrained" else None
                    )
                    run = pretrain(images, policies[cell.policy], spec, bt_config)
                    probe = probe_encoder(run.encoder, images, labels, probe_config, out_size)
                result.cells.append(
                    CellResult(
                        model=cell.name,
                        dataset=dataset_name,
                        status="ok",
                        top1=probe.metrics.top1_acc,
                        auc=probe.metrics.auc,
                        note=note,
                    )
                )
            except (ValueError, FileNotFoundError, RuntimeError) as exc:
                logger.warning("cell %s/%s failed: %s", cell.name, dataset_name, exc)
                result.cells.append(
                    CellResult(model=cell.name, dataset=dataset_name, status="failed", note=str(exc))
                )
    if out_csv is not None:
        result.to_csv(out_csv)
    return result


@dataclass
class TransferCell:
    train_fov: str
    eval_fov: str
    status: str
    top1: float | None = None
    auc: float | None = None
    diagonal: bool = False
    note: str = ""


@dataclass
class TransferResult:
    cells: list[TransferCell] = field(default_factory=list)

    def grid_complete(self, fovs) -> bool:
        have = {(c.train_fov, c.eval_fov) for c in self.cells}
        return all((a, b) in have for a in fovs for b in fovs)

    def mean_accuracy(self, diagonal: bool) -> float:
        vals = [c.top1 for c in self.cells if c.diagonal == diagonal and c.top1 is not None]
        return float(np.mean(vals)) if vals else float("nan")

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["train_fov", "eval_fov", "status", "top1_acc", "auc", "diagonal", "note"])
            for c in self.cells:
                writer.writerow([c.train_fov, c.eval_fov, c.status, c.top1, c.auc, c.diagonal, c.note])


def transfer_matrix(
    encoders: dict[str, torch.nn.Module | None],
    datasets: dict[str, tuple[list, list]],
    probe_config: ProbeConfig,
    input_size: int | None = None,
    out_csv: str | Path | None = None,
) -> TransferResult:
    """Probe each per-FoV encoder on every FoV's tiles; G x G grid.

    A missing encoder marks its row of cells absent (with the reason) and the
    sweep continues. Diagonal cells are flagged.
    """
    fovs = sorted(datasets)
    if len(fovs) < 2:
        raise ValueError("transfer matrix needs at least 2 fields of view")
    result = TransferResult()
    for train_fov in fovs:
        encoder = encoders.get(train_fov)
        for eval_fov in fovs:
            diagonal = train_fov == eval_fov
            if encoder is None:
                result.cells.append(
                    TransferCell(
                        train_fov,
                        eval_fov,
                        status="absent",
                        diagonal=diagonal,
                        note=f"no encoder trained on {train_fov}",
                    )
                )
                continue
            images, labels = datasets[eval_fov]
            try:
                probe = probe_encoder(encoder, images, labels, probe_config, input_size)
                result.cells.append(
                    TransferCell(
                        train_fov,
                        eval_fov,
                        status="ok",
                        top1=probe.metrics.top1_acc,
                        auc=probe.metrics.auc,
                        diagonal=diagonal,
                    )
                )
            except ValueError as exc:
                result.cells.append(
                    TransferCell(train_fov, eval_fov, status="failed", diagonal=diagonal, note=str(exc))
                )
    if out_csv is not None:
        result.to_csv(out_csv)
    return result
