from .synthetic import (
    ClassTexture,
    SlideInfo,
    SynthTiles,
    SyntheticSpec,
    frequency_textures,
    palette_textures,
    pattern_textures,
    render_artifact,
    render_tile,
    synth_slide,
    synth_slides,
    synth_tiles,
)
from .runs import RunHandle, RunRecord, RunRegistry, run_at_dir
from .supervised import SupervisedConfig, SupervisedResult, supervised_train
from .matrix import (
    CellResult,
    MatrixCell,
    MatrixResult,
    TransferCell,
    TransferResult,
    default_matrix_cells,
    experiment_matrix,
    probe_encoder,
    transfer_matrix,
)
from .ablation import ABLATION_AXES, AblationReport, ablation, apply_axis, policy_is_degenerate
from .report import report

__all__ = [
    "ClassTexture",
    "SlideInfo",
    "SynthTiles",
    "SyntheticSpec",
    "frequency_textures",
    "palette_textures",
    "pattern_textures",
    "render_artifact",
    "render_tile",
    "synth_slide",
    "synth_slides",
    "synth_tiles",
    "RunHandle",
    "RunRecord",
    "RunRegistry",
    "run_at_dir",
    "SupervisedConfig",
    "SupervisedResult",
    "supervised_train",
    "CellResult",
    "MatrixCell",
    "MatrixResult",
    "TransferCell",
    "TransferResult",
    "default_matrix_cells",
    "experiment_matrix",
    "probe_encoder",
    "transfer_matrix",
    "ABLATION_AXES",
    "AblationReport",
    "ablation",
    "apply_axis",
    "policy_is_degenerate",
    "report",
]
