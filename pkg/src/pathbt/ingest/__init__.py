from .types import (
    DEFAULT_FOVS_MICRONS,
    ROI_IN,
    ROI_NORMAL,
    ROI_OUT,
    SlideManifest,
    TileRecord,
    TissueMask,
    load_slide_manifests,
    save_slide_manifests,
)
from .otsu import otsu_threshold, rgb_to_gray, tissue_mask
from .tiling import grid_tiles, label_roi_membership, roi_membership, side_px_for_fov
from .artifact_filter import (
    ArtifactFilterConfig,
    ArtifactFilterModel,
    ArtifactFilterNet,
    filter_tiles,
    train_artifact_filter,
)
from .export import TileDataset, export_dataset, read_manifest, read_meta, tile_filename
from .reader import RasterSlideReader, open_slide

__all__ = [
    "DEFAULT_FOVS_MICRONS",
    "ROI_IN",
    "ROI_NORMAL",
    "ROI_OUT",
    "SlideManifest",
    "TileRecord",
    "TissueMask",
    "load_slide_manifests",
    "save_slide_manifests",
    "otsu_threshold",
    "rgb_to_gray",
    "tissue_mask",
    "grid_tiles",
    "label_roi_membership",
    "roi_membership",
    "side_px_for_fov",
    "ArtifactFilterConfig",
    "ArtifactFilterModel",
    "ArtifactFilterNet",
    "filter_tiles",
    "train_artifact_filter",
    "TileDataset",
    "export_dataset",
    "read_manifest",
    "read_meta",
    "tile_filename",
    "RasterSlideReader",
    "open_slide",
]
