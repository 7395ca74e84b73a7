"""Grid tile enumeration and ROI membership labeling."""

from __future__ import annotations

import numpy as np
from shapely.geometry import Polygon, box
from shapely.ops import unary_union

from .types import ROI_IN, ROI_NORMAL, ROI_OUT, SlideManifest, TileRecord, TissueMask


def side_px_for_fov(fov_microns: float, mpp: float) -> int:
    """Tile side in pixels covering the requested physical field of view."""
    if fov_microns <= 0:
        raise ValueError("fov_microns must be positive")
    if mpp <= 0:
        raise ValueError("mpp must be positive")
    side = int(round(fov_microns / mpp))
    if side < 1:
        raise ValueError(f"fov {fov_microns} um is smaller than 1 pixel at {mpp} mpp")
    return side


def grid_tiles(
    manifest: SlideManifest,
    fov_microns: float,
    mask: TissueMask,
    min_tissue_frac: float = 0.5,
    slide_dims: tuple[int, int] | None = None,
) -> list[TileRecord]:
    """Non-overlapping tile grid over cells with enough mask tissue.

    Returns coordinate-only records (tissue_score and roi_membership are
    filled by later stages). Tiles lie fully inside the slide bounds.
    """
    if not 0.0 <= min_tissue_frac <= 1.0:
        raise ValueError("min_tissue_frac must lie in [0, 1]")
    side = side_px_for_fov(fov_microns, manifest.mpp)
    if slide_dims is not None:
        width, height = slide_dims
    else:
        # conservative bounds reconstructed from the thumbnail grid
        height = int(mask.grid.shape[0] * mask.downsample)
        width = int(mask.grid.shape[1] * mask.downsample)

    d = mask.downsample
    gh, gw = mask.grid.shape
    records = []
    for y in range(0, height - side + 1, side):
        my0 = int(np.floor(y / d))
        my1 = min(gh, int(np.ceil((y + side) / d)))
        for x in range(0, width - side + 1, side):
            mx0 = int(np.floor(x / d))
            mx1 = min(gw, int(np.ceil((x + side) / d)))
            cell = mask.grid[my0:my1, mx0:mx1]
            frac = float(cell.mean()) if cell.size else 0.0
            if frac >= min_tissue_frac:
                records.append(
                    TileRecord(
                        slide_id=manifest.slide_id,
                        x=x,
                        y=y,
                        fov_microns=fov_microns,
                        side_px=side,
                        class_label=manifest.class_label,
                    )
                )
    return records


def _roi_union(polygons):
    shapes = []
    for i, poly in enumerate(polygons):
        shape = Polygon(poly)
        if not shape.is_valid:
            raise ValueError(f"invalid polygon (index {i})")
        shapes.append(shape)
    return unary_union(shapes)


def roi_membership(tile: TileRecord, polygons, min_overlap: float = 0.5) -> str:
    """Label a tile by overlap with annotation polygons.

    A slide with no polygons and class Normal yields normal_slide; otherwise a
    tile is in_roi when at least ``min_overlap`` of its area intersects the
    polygon union (the boundary case counts as inside).
    """
    if not polygons:
        return ROI_NORMAL if tile.class_label == "Normal" else ROI_OUT
    union = _roi_union(polygons)
    tile_shape = box(tile.x, tile.y, tile.x + tile.side_px, tile.y + tile.side_px)
    overlap = tile_shape.intersection(union).area / tile_shape.area
    return ROI_IN if overlap >= min_overlap else ROI_OUT


def label_roi_membership(
    tiles: list[TileRecord], manifest: SlideManifest, min_overlap: float = 0.5
) -> list[TileRecord]:
    """Assign roi_membership to every tile of one slide, in place."""
    polygons = manifest.roi_polygons
    union = _roi_union(polygons) if polygons else None
    for tile in tiles:
        if union is None:
            tile.roi_membership = ROI_NORMAL if manifest.class_label == "Normal" else ROI_OUT
        else:
            tile_shape = box(tile.x, tile.y, tile.x + tile.side_px, tile.y + tile.side_px)
            overlap = tile_shape.intersection(union).area / tile_shape.area
            tile.roi_membership = ROI_IN if overlap >= min_overlap else ROI_OUT
    return tiles
