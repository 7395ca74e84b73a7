"""Domain records for slide ingestion: manifests, tiles, tissue masks."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

TILE_CLASSES = ("Normal", "HP", "SSLe", "TA", "TVA")
DEFAULT_FOVS_MICRONS = (410.0, 600.0, 800.0, 1400.0)

ROI_IN = "in_roi"
ROI_OUT = "out_roi"
ROI_NORMAL = "normal_slide"
ROI_MEMBERSHIPS = (ROI_IN, ROI_OUT, ROI_NORMAL)


@dataclass
class SlideManifest:
    """Metadata for one slide: geometry, class label, ROI polygons, image path."""

    slide_id: str
    class_label: str
    mpp: float
    image_source: str
    level_downsamples: list[float] = field(default_factory=lambda: [1.0])
    roi_polygons: list[list[list[float]]] = field(default_factory=list)

    def __post_init__(self):
        if self.mpp <= 0:
            raise ValueError(f"mpp must be positive, got {self.mpp}")
        ds = self.level_downsamples
        if not ds or ds[0] != 1.0 or any(b <= a for a, b in zip(ds, ds[1:])):
            raise ValueError("level_downsamples must be strictly increasing and start at 1")
        for poly in self.roi_polygons:
            if len(poly) < 3:
                raise ValueError(f"polygon with {len(poly)} vertices on slide {self.slide_id}")
            if _polygon_area(poly) == 0.0:
                raise ValueError(f"zero-area polygon on slide {self.slide_id}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SlideManifest":
        return cls(
            slide_id=d["slide_id"],
            class_label=d["class_label"],
            mpp=float(d["mpp"]),
            image_source=d["image_source"],
            level_downsamples=[float(x) for x in d.get("level_downsamples", [1.0])],
            roi_polygons=[[[float(c) for c in pt] for pt in poly] for poly in d.get("roi_polygons", [])],
        )


def _polygon_area(poly) -> float:
    """Shoelace area of a closed polygon given as [[x, y], ...]."""
    pts = np.asarray(poly, dtype=np.float64)
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


@dataclass
class TileRecord:
    """One extracted tile, addressed in base-level pixel coordinates."""

    slide_id: str
    x: int
    y: int
    fov_microns: float
    side_px: int
    class_label: str
    roi_membership: str = ROI_OUT
    tissue_score: float = 1.0

    def __post_init__(self):
        if self.x < 0 or self.y < 0:
            raise ValueError(f"negative tile origin ({self.x}, {self.y})")
        if self.side_px <= 0:
            raise ValueError(f"side_px must be positive, got {self.side_px}")
        if not 0.0 <= self.tissue_score <= 1.0:
            raise ValueError(f"tissue_score outside [0, 1]: {self.tissue_score}")
        if self.roi_membership not in ROI_MEMBERSHIPS:
            raise ValueError(f"unknown roi_membership {self.roi_membership!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TileRecord":
        return cls(
            slide_id=d["slide_id"],
            x=int(d["x"]),
            y=int(d["y"]),
            fov_microns=float(d["fov_microns"]),
            side_px=int(d["side_px"]),
            class_label=d["class_label"],
            roi_membership=d.get("roi_membership", ROI_OUT),
            tissue_score=float(d.get("tissue_score", 1.0)),
        )


@dataclass
class TissueMask:
    """Boolean tissue grid at thumbnail resolution."""

    grid: np.ndarray
    threshold: int
    downsample: float

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=bool)
        if self.grid.ndim != 2:
            raise ValueError("mask grid must be 2-D")
        if not 0 <= self.threshold <= 255:
            raise ValueError(f"threshold outside [0, 255]: {self.threshold}")
        if self.downsample <= 0:
            raise ValueError("downsample must be positive")

    @property
    def tissue_fraction(self) -> float:
        return float(self.grid.mean()) if self.grid.size else 0.0


def load_slide_manifests(path: str | Path) -> list[SlideManifest]:
    """Read a slides.json file (list of SlideManifest dicts)."""
    with open(path, "r", encoding="utf-8") as f:
        payload = json.load(f)
    if isinstance(payload, dict):
        payload = payload["slides"]
    return [SlideManifest.from_dict(d) for d in payload]


def save_slide_manifests(manifests: list[SlideManifest], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump([m.to_dict() for m in manifests], f, indent=2)
