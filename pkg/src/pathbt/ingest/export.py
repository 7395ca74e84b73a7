"""Tile dataset persistence: PNG tiles plus a JSON-lines manifest."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from PIL import Image

from .types import TileRecord

MANIFEST_NAME = "tiles.jsonl"
META_NAME = "dataset.json"


def tile_filename(record: TileRecord) -> str:
    return f"{record.class_label}/{record.slide_id}_{record.x}_{record.y}.png"


def export_dataset(
    tiles: list[TileRecord],
    images: list[np.ndarray],
    out_dir: str | Path,
    overwrite: bool = False,
    jobs: int = 1,
    extra_meta: dict | None = None,
) -> Path:
    """Write tiles as ``<class>/<slide_id>_<x>_<y>.png`` plus a manifest.

    Records are sorted by (slide_id, y, x) so parallel extraction stays
    deterministic. Returns the manifest path.
    """
    if len(tiles) != len(images):
        raise ValueError("tiles and images must align")
    out_dir = Path(out_dir)
    manifest_path = out_dir / MANIFEST_NAME
    if manifest_path.exists() and not overwrite:
        raise FileExistsError(f"manifest already exists: {manifest_path} (use overwrite)")
    out_dir.mkdir(parents=True, exist_ok=True)

    order = sorted(range(len(tiles)), key=lambda i: (tiles[i].slide_id, tiles[i].y, tiles[i].x))

    def _write_one(i: int) -> None:
        rec = tiles[i]
        path = out_dir / tile_filename(rec)
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(images[i]).save(path)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(_write_one, order))
    else:
        for i in order:
            _write_one(i)

    with open(manifest_path, "w", encoding="utf-8") as f:
        for i in order:
            f.write(json.dumps(tiles[i].to_dict(), sort_keys=True) + "\n")
    meta = {"n_tiles": len(tiles), "classes": sorted({t.class_label for t in tiles})}
    if extra_meta:
        meta.update(extra_meta)
    with open(out_dir / META_NAME, "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
    return manifest_path


def read_manifest(dataset_dir: str | Path) -> list[TileRecord]:
    manifest_path = Path(dataset_dir) / MANIFEST_NAME
    records = []
    with open(manifest_path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(TileRecord.from_dict(json.loads(line)))
    return records


def read_meta(dataset_dir: str | Path) -> dict:
    path = Path(dataset_dir) / META_NAME
    if not path.exists():
        return {}
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


class TileDataset:
    """Tile records plus lazy image loading from an exported directory."""

    def __init__(self, dataset_dir: str | Path):
        self.root = Path(dataset_dir)
        self.records = read_manifest(self.root)
        self.meta = read_meta(self.root)

    def __len__(self) -> int:
        return len(self.records)

    def image(self, index: int) -> np.ndarray:
        rec = self.records[index]
        return np.asarray(Image.open(self.root / tile_filename(rec)).convert("RGB"))

    def images(self) -> list[np.ndarray]:
        return [self.image(i) for i in range(len(self.records))]

    def labels(self) -> list[str]:
        return [r.class_label for r in self.records]
