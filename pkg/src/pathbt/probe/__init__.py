from .metrics import (
    MetricsRecord,
    binary_auc,
    compute_metrics,
    confusion_matrix,
    roc_curve_points,
)
from .embeddings import encoder_checksum, extract_embeddings
from .linear import ProbeConfig, ProbeResult, balanced_split, train_probe
from .mix import cutmix_batch, eval_phase_mix, mixup_batch
from .projection import project_2d

__all__ = [
    "MetricsRecord",
    "binary_auc",
    "compute_metrics",
    "confusion_matrix",
    "roc_curve_points",
    "encoder_checksum",
    "extract_embeddings",
    "ProbeConfig",
    "ProbeResult",
    "balanced_split",
    "train_probe",
    "cutmix_batch",
    "eval_phase_mix",
    "mixup_batch",
    "project_2d",
]
