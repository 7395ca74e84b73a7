from .model import AttentionMILClassifier, GatedAttentionPool
from .bags import AttentionBag, BagAssembly, bag_assemble
from .train import (
    MILConfig,
    MILEpochRecord,
    MILResult,
    predict_slide,
    stratified_slide_split,
    train_mil,
)
from .heatmap import attention_color, heatmap_export

__all__ = [
    "AttentionMILClassifier",
    "GatedAttentionPool",
    "AttentionBag",
    "BagAssembly",
    "bag_assemble",
    "MILConfig",
    "MILEpochRecord",
    "MILResult",
    "predict_slide",
    "stratified_slide_split",
    "train_mil",
    "attention_color",
    "heatmap_export",
]
