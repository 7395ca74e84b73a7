"""Tile dataset export and manifest round-tripping."""

import json

import numpy as np
import pytest

from pathbt.ingest import TileDataset, TileRecord, export_dataset, read_manifest


def make_tiles(n, side=16):
    gen = np.random.default_rng(0)
    tiles, images = [], []
    for i in range(n):
        tiles.append(
            TileRecord(
                slide_id=f"s{i % 2}",
                x=(i // 2) * side,
                y=(i % 2) * side,
                fov_microns=410.0,
                side_px=side,
                class_label=["HP", "TA", "Normal", "SSLe", "TVA"][i % 5],
                roi_membership="in_roi",
                tissue_score=float(i % 10) / 10,
            )
        )
        images.append(gen.integers(0, 255, size=(side, side, 3), dtype=np.uint8))
    return tiles, images


class TestExportDataset:
    def test_empty_export_is_a_valid_manifest(self, tmp_path):
        manifest = export_dataset([], [], tmp_path / "ds")
        assert read_manifest(tmp_path / "ds") == []
        assert manifest.exists()

    def test_round_trip_reproduces_records_exactly(self, tmp_path):
        tiles, images = make_tiles(10)
        export_dataset(tiles, images, tmp_path / "ds")
        again = read_manifest(tmp_path / "ds")
        key = lambda t: (t.slide_id, t.y, t.x)
        assert sorted(again, key=key) == sorted(tiles, key=key)

    def test_per_class_counts_preserved(self, tmp_path):
        tiles, images = make_tiles(25)
        export_dataset(tiles, images, tmp_path / "ds")
        ds = TileDataset(tmp_path / "ds")
        for cls in {t.class_label for t in tiles}:
            assert sum(r.class_label == cls for r in ds.records) == sum(
                t.class_label == cls for t in tiles
            )

    def test_existing_manifest_requires_overwrite(self, tmp_path):
        tiles, images = make_tiles(4)
        export_dataset(tiles, images, tmp_path / "ds")
        with pytest.raises(FileExistsError):
            export_dataset(tiles, images, tmp_path / "ds")
        export_dataset(tiles, images, tmp_path / "ds", overwrite=True)

    def test_records_sorted_by_slide_then_y_then_x(self, tmp_path):
        tiles, images = make_tiles(12)
        export_dataset(tiles, images, tmp_path / "ds", jobs=2)
        again = read_manifest(tmp_path / "ds")
        keys = [(t.slide_id, t.y, t.x) for t in again]
        assert keys == sorted(keys)

    def test_images_round_trip_bit_exact(self, tmp_path):
        tiles, images = make_tiles(6)
        export_dataset(tiles, images, tmp_path / "ds")
        ds = TileDataset(tmp_path / "ds")
        by_key = {(t.slide_id, t.y, t.x): img for t, img in zip(tiles, images)}
        for i, rec in enumerate(ds.records):
            assert np.array_equal(ds.image(i), by_key[(rec.slide_id, rec.y, rec.x)])

    def test_layout_is_class_slash_slide_x_y(self, tmp_path):
        tiles, images = make_tiles(2)
        export_dataset(tiles, images, tmp_path / "ds")
        t = tiles[0]
        assert (tmp_path / "ds" / t.class_label / f"{t.slide_id}_{t.x}_{t.y}.png").exists()
