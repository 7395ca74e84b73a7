"""Bag assembly: group tiles per slide and embed them with a frozen encoder."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..ingest.types import TileRecord
from ..probe.embeddings import extract_embeddings

logger = logging.getLogger(__name__)


@dataclass
class AttentionBag:
    """A slide's instance embeddings plus, once predicted, attention and scores."""

    slide_id: str
    instances: np.ndarray  # M x F
    tile_coords: list[tuple[int, int, int]]  # (x, y, side)
    label: str
    attention: np.ndarray | None = None
    slide_scores: np.ndarray | None = None

    def __post_init__(self):
        self.instances = np.asarray(self.instances, dtype=np.float32)
        if self.instances.ndim != 2 or self.instances.shape[0] < 1:
            raise ValueError("bag needs at least one instance")
        if len(self.tile_coords) != self.instances.shape[0]:
            raise ValueError("tile_coords must align with instances")

    @property
    def size(self) -> int:
        return self.instances.shape[0]


@dataclass
class BagAssembly:
    bags: list[AttentionBag]
    skipped: list[str] = field(default_factory=list)


def bag_assemble(
    tiles: list[TileRecord],
    images,
    encoder,
    slide_labels: dict[str, str] | None = None,
    input_size: int | None = None,
) -> BagAssembly:
    """Build one bag per slide from tile records and their images.

    Slides that end up with zero tiles (present in ``slide_labels`` but absent
    from the records) are logged and listed as skipped rather than failing.
    """
    if len(tiles) != len(images):
        raise ValueError("tiles and images must align")
    by_slide: dict[str, list[int]] = {}
    for i, rec in enumerate(tiles):
        by_slide.setdefault(rec.slide_id, []).append(i)

    expected = dict(slide_labels) if slide_labels else {}
    skipped = [sid for sid in expected if sid not in by_slide]
    for sid in skipped:
        logger.warning("slide %s has no tiles to process; skipping", sid)

    bags = []
    for sid in sorted(by_slide):
        idx = by_slide[sid]
        feats = extract_embeddings(encoder, [images[i] for i in idx], input_size=input_size)
        coords = [(tiles[i].x, tiles[i].y, tiles[i].side_px) for i in idx]
        label = expected.get(sid, tiles[idx[0]].class_label)
        bags.append(AttentionBag(slide_id=sid, instances=feats, tile_coords=coords, label=label))
    return BagAssembly(bags=bags, skipped=sorted(skipped))
