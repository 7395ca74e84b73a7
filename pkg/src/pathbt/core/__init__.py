from .objective import (
    BTLossTerms,
    CrossCorrelation,
    EmbeddingBatch,
    bt_loss,
    bt_loss_from_raw,
    cross_correlation,
    standardize,
)
from .lars import LARS, lars_param_groups
from .encoders import (
    EncoderSpec,
    SmallConvEncoder,
    encoder_registry,
    FAMILY_DIMS,
)
from .projector import build_projector
from .pretrain import (
    BTConfig,
    EpochRecord,
    PretrainResult,
    load_encoder_checkpoint,
    lr_factor,
    make_views,
    pretrain,
    save_checkpoint,
    write_loss_csv,
)

__all__ = [
    "BTLossTerms",
    "CrossCorrelation",
    "EmbeddingBatch",
    "bt_loss",
    "bt_loss_from_raw",
    "cross_correlation",
    "standardize",
    "LARS",
    "lars_param_groups",
    "EncoderSpec",
    "SmallConvEncoder",
    "encoder_registry",
    "FAMILY_DIMS",
    "build_projector",
    "BTConfig",
    "EpochRecord",
    "PretrainResult",
    "load_encoder_checkpoint",
    "lr_factor",
    "make_views",
    "pretrain",
    "save_checkpoint",
    "write_loss_csv",
]
