"""Tile grid arithmetic and ROI membership."""

import numpy as np
import pytest

from pathbt.ingest import (
    ROI_IN,
    ROI_NORMAL,
    ROI_OUT,
    SlideManifest,
    TileRecord,
    TissueMask,
    grid_tiles,
    roi_membership,
    side_px_for_fov,
)


def make_manifest(mpp=0.4, class_label="HP", polygons=()):
    return SlideManifest(
        slide_id="s1",
        class_label=class_label,
        mpp=mpp,
        image_source="s1.png",
        roi_polygons=list(polygons),
    )


def full_mask(shape, downsample):
    return TissueMask(grid=np.ones(shape, dtype=bool), threshold=128, downsample=downsample)


class TestSidePx:
    def test_fov_410_at_standard_mpp(self):
        assert side_px_for_fov(410, 0.4) == 1025

    def test_fov_1400_at_standard_mpp(self):
        assert side_px_for_fov(1400, 0.4) == 3500

    def test_subpixel_fov_rejected(self):
        with pytest.raises(ValueError, match="smaller than 1 pixel"):
            side_px_for_fov(0.1, 0.4)

    def test_monotone_in_fov(self):
        sides = [side_px_for_fov(f, 0.4) for f in (410, 600, 800, 1400)]
        assert sides == sorted(sides)


class TestGridTiles:
    def test_full_tissue_8000px_slide_yields_16_tiles(self):
        manifest = make_manifest(mpp=0.4)
        mask = full_mask((250, 250), downsample=32.0)
        tiles = grid_tiles(manifest, 800, mask, min_tissue_frac=0.5, slide_dims=(8000, 8000))
        assert len(tiles) == 16
        assert all(t.side_px == 2000 for t in tiles)

    def test_all_false_mask_yields_nothing(self):
        manifest = make_manifest(mpp=0.4)
        mask = TissueMask(grid=np.zeros((250, 250), dtype=bool), threshold=10, downsample=32.0)
        assert grid_tiles(manifest, 800, mask, 0.5, slide_dims=(8000, 8000)) == []

    def test_tiles_disjoint_and_inside_bounds(self):
        manifest = make_manifest(mpp=2.0)
        mask = full_mask((100, 100), downsample=2.0)
        tiles = grid_tiles(manifest, 60, mask, 0.5, slide_dims=(200, 200))
        side = tiles[0].side_px
        boxes = {(t.x, t.y) for t in tiles}
        assert len(boxes) == len(tiles)
        for t in tiles:
            assert t.x + side <= 200 and t.y + side <= 200
        # pairwise disjoint by grid construction: origins differ by multiples of side
        for t in tiles:
            assert t.x % side == 0 and t.y % side == 0

    def test_smaller_fov_never_fewer_tiles(self):
        manifest = make_manifest(mpp=2.0)
        mask = full_mask((128, 128), downsample=2.0)
        n_small = len(grid_tiles(manifest, 80, mask, 0.5, slide_dims=(256, 256)))
        n_large = len(grid_tiles(manifest, 160, mask, 0.5, slide_dims=(256, 256)))
        assert n_small >= n_large


def square(x0, y0, side):
    return [[x0, y0], [x0 + side, y0], [x0 + side, y0 + side], [x0, y0 + side]]


def tile_at(x, y, side, label="HP"):
    return TileRecord(
        slide_id="s1", x=x, y=y, fov_microns=410, side_px=side, class_label=label
    )


class TestRoiMembership:
    def test_fully_inside_polygon(self):
        assert roi_membership(tile_at(10, 10, 10), [square(0, 0, 100)]) == ROI_IN

    def test_disjoint_on_lesion_slide(self):
        assert roi_membership(tile_at(200, 200, 10), [square(0, 0, 100)]) == ROI_OUT

    def test_exactly_half_covered_is_in(self):
        # polygon covers the left half of the tile exactly
        assert roi_membership(tile_at(0, 0, 10), [square(-5, 0, 10)]) == ROI_IN

    def test_normal_slide_without_polygons(self):
        assert roi_membership(tile_at(0, 0, 10, label="Normal"), []) == ROI_NORMAL

    def test_lesion_slide_without_polygons_is_out(self):
        assert roi_membership(tile_at(0, 0, 10, label="HP"), []) == ROI_OUT

    def test_self_intersecting_polygon_rejected(self):
        bowtie = [[0, 0], [10, 10], [10, 0], [0, 10]]
        with pytest.raises(ValueError, match="invalid polygon"):
            roi_membership(tile_at(0, 0, 10), [bowtie])

    def test_invariance_under_reversal_and_joint_translation(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            x, y = rng.integers(0, 50, size=2)
            side = int(rng.integers(4, 20))
            poly = square(*rng.integers(0, 60, size=2), int(rng.integers(5, 40)))
            base = roi_membership(tile_at(int(x), int(y), side), [poly])
            assert roi_membership(tile_at(int(x), int(y), side), [poly[::-1]]) == base
            dx, dy = (int(v) for v in rng.integers(1, 30, size=2))
            moved_poly = [[px + dx, py + dy] for px, py in poly]
            moved = roi_membership(tile_at(int(x) + dx, int(y) + dy, side), [moved_poly])
            assert moved == base
