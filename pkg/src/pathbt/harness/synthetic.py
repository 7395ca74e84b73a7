"""Procedural tile and slide generators with known ground truth.

Tiles are oriented sinusoidal gratings with per-class frequency, orientation,
and palette; slides are grids of glass and tissue cells with optional signal
regions and cell-aligned annotation polygons. Everything is a pure function
of the seed.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage, special

from ..ingest.export import export_dataset
from ..ingest.types import SlideManifest, TileRecord, save_slide_manifests

GLASS_LEVEL = 250.0
MAX_TISSUE_LEVEL = 215.0

TEXTURE_KINDS = ("grating", "plaid", "ringnoise")


@dataclass
class ClassTexture:
    name: str
    frequency: float  # wave cycles across one tile
    palette_fg: tuple[int, int, int]
    palette_bg: tuple[int, int, int]
    orientation_deg: float | None = None  # None draws a fresh angle per tile
    kind: str = "grating"
    noise: float = 6.0
    frequency_jitter: tuple[float, float] = (1.0, 1.0)
    contrast_range: tuple[float, float] = (0.32, 0.32)
    illumination_range: tuple[float, float] = (0.92, 1.08)
    match_histogram: bool = False  # rank-gaussianize the wave per tile

    def __post_init__(self):
        if self.kind not in TEXTURE_KINDS:
            raise ValueError(f"unknown texture kind {self.kind!r}")


def palette_textures(n_classes: int) -> list[ClassTexture]:
    """Classes separated by color at a shared frequency; easy for raw pixels."""
    base = [
        ((150, 60, 120), (205, 170, 195)),
        ((60, 120, 150), (170, 200, 210)),
        ((120, 150, 60), (195, 210, 170)),
        ((150, 120, 60), (210, 195, 170)),
        ((90, 60, 150), (185, 175, 210)),
    ]
    return [
        ClassTexture(
            name=f"class{i}",
            frequency=8.0,
            palette_fg=base[i % len(base)][0],
            palette_bg=base[i % len(base)][1],
        )
        for i in range(n_classes)
    ]


def frequency_textures(
    n_classes: int, base_frequency: float = 4.0, step: float = 2.5, scale: float = 1.0
) -> list[ClassTexture]:
    """Classes separated by texture scale under one shared palette.

    Orientation and phase are random per tile, so scale is the dominant class
    signal; ``scale`` rescales all frequencies jointly (used to mimic the same
    physical texture seen at a different field of view).
    """
    fg, bg = (140, 70, 130), (205, 175, 200)
    return [
        ClassTexture(
            name=f"scale{i}",
            frequency=base_frequency * step**i * scale,
            palette_fg=fg,
            palette_bg=bg,
            orientation_deg=None,
        )
        for i in range(n_classes)
    ]


def pattern_textures(n_classes: int, base_frequency: float = 8.0) -> list[ClassTexture]:
    """Classes separated only by spatial arrangement, not by pixel statistics.

    All classes share one palette, one frequency band, rank-matched value
    histograms, and the same contrast/illumination nuisance ranges; what
    differs is the wave structure (single grating, two-orientation plaid,
    ring-filtered noise). A linear probe on random conv features stays near
    chance here while a trained encoder separates the patterns.
    """
    fg, bg = (140, 70, 130), (205, 175, 200)
    kinds = list(TEXTURE_KINDS)
    return [
        ClassTexture(
            name=f"pattern_{kinds[i % 3]}{i // 3 if i >= 3 else ''}",
            frequency=base_frequency * 2.0 ** (i // 3),
            palette_fg=fg,
            palette_bg=bg,
            orientation_deg=None,
            kind=kinds[i % 3],
            noise=7.0,
            frequency_jitter=(0.75, 1.3),
            contrast_range=(0.18, 0.38),
            illumination_range=(0.85, 1.12),
            match_histogram=True,
        )
        for i in range(n_classes)
    ]


@dataclass
class SyntheticSpec:
    n_classes: int = 3
    tiles_per_class: int = 200
    tile_size: int = 64
    textures: list[ClassTexture] | None = None
    artifact_fraction: float = 0.0
    # slide composition
    slide_grid: int = 8
    slide_tissue_fraction: float = 0.75
    signal_fraction: float = 0.5
    annotation_coverage: float = 0.5
    fov_microns: float = 410.0
    seed: int = 0

    def __post_init__(self):
        if self.textures is None:
            self.textures = palette_textures(self.n_classes)
        if len(self.textures) < self.n_classes:
            raise ValueError("need one texture per class")
        if not 0.0 <= self.artifact_fraction <= 1.0:
            raise ValueError("artifact_fraction outside [0, 1]")

    @property
    def mpp(self) -> float:
        # chosen so one tile at the default field of view spans tile_size px
        return self.fov_microns / self.tile_size


def _rank_gauss(wave: np.ndarray) -> np.ndarray:
    """Impose one fixed Gaussian value histogram on a wave, by rank."""
    flat = wave.ravel()
    order = np.argsort(flat, kind="stable")
    n = flat.size
    target = special.ndtri((np.arange(n) + 0.5) / n)
    out = np.empty(n)
    out[order] = target
    return out.reshape(wave.shape)


def _sine_wave(size: int, frequency: float, theta: float, phase: float) -> np.ndarray:
    coords = np.arange(size, dtype=np.float64)
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    return np.sin(
        2.0 * math.pi * frequency * (xx * math.cos(theta) + yy * math.sin(theta)) / size + phase
    )


def _wave(size: int, texture: ClassTexture, frequency: float, rng: np.random.Generator) -> np.ndarray:
    theta = (
        math.radians(texture.orientation_deg)
        if texture.orientation_deg is not None
        else rng.uniform(0.0, math.pi)
    )
    if texture.kind == "grating":
        return _sine_wave(size, frequency, theta, rng.uniform(0.0, 2.0 * math.pi))
    if texture.kind == "plaid":
        theta2 = (theta + rng.uniform(math.pi / 4, 3 * math.pi / 4)) % math.pi
        return _sine_wave(size, frequency, theta, rng.uniform(0.0, 2.0 * math.pi)) + _sine_wave(
            size, frequency, theta2, rng.uniform(0.0, 2.0 * math.pi)
        )
    # ringnoise: white noise band-passed to the same radial frequency
    noise = rng.standard_normal((size, size))
    spectrum = np.fft.fft2(noise)
    fy = np.fft.fftfreq(size)[:, None] * size
    fx = np.fft.fftfreq(size)[None, :] * size
    radius = np.hypot(fy, fx)
    band = (radius > frequency * 0.72) & (radius < frequency * 1.28)
    return np.fft.ifft2(spectrum * band).real


def render_tile(texture: ClassTexture, size: int, rng: np.random.Generator) -> np.ndarray:
    """One tissue tile: palette-blended wave plus shared nuisance factors."""
    frequency = texture.frequency * rng.uniform(*texture.frequency_jitter)
    wave = _wave(size, texture, frequency, rng)
    if texture.match_histogram:
        wave = _rank_gauss(wave)
        amplitude = rng.uniform(*texture.contrast_range)
        blend = np.clip(0.5 + amplitude * wave, 0.0, 1.0)
    else:
        wave = (wave - wave.mean()) / (wave.std() + 1e-9)
        blend = np.clip(0.5 + 0.5 * wave / math.sqrt(2.0), 0.0, 1.0)
    fg = np.asarray(texture.palette_fg, dtype=np.float64)
    bg = np.asarray(texture.palette_bg, dtype=np.float64)
    tile = bg + (fg - bg) * blend[..., None]
    tile += rng.normal(0.0, texture.noise, size=tile.shape)
    tile *= rng.uniform(*texture.illumination_range)
    return np.clip(tile, 0, MAX_TISSUE_LEVEL).astype(np.uint8)


def _glass(size: int, rng: np.random.Generator) -> np.ndarray:
    tile = rng.normal(GLASS_LEVEL, 2.0, size=(size, size, 3))
    return np.clip(tile, 244, 255).astype(np.uint8)


def render_artifact(kind: str, size: int, rng: np.random.Generator, texture: ClassTexture | None = None) -> np.ndarray:
    """Blur, blank, or scribble artifacts for filter training."""
    if kind == "blank":
        return _glass(size, rng)
    if kind == "blur":
        base = render_tile(texture or palette_textures(1)[0], size, rng)
        blurred = ndimage.gaussian_filter(base.astype(np.float32), sigma=(6.0, 6.0, 0.0))
        return np.clip(blurred, 0, 255).astype(np.uint8)
    if kind == "scribble":
        tile = _glass(size, rng).astype(np.float64)
        for _ in range(rng.integers(2, 5)):
            x = rng.uniform(0, size, 2)
            y = rng.uniform(0, size, 2)
            n = 2 * size
            xs = np.clip(np.linspace(x[0], x[1], n) + rng.normal(0, 1.5, n), 0, size - 1).astype(int)
            ys = np.clip(np.linspace(y[0], y[1], n) + rng.normal(0, 1.5, n), 0, size - 1).astype(int)
            color = rng.uniform(0, 60, 3)
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    tile[np.clip(ys + dy, 0, size - 1), np.clip(xs + dx, 0, size - 1)] = color
        return np.clip(tile, 0, 255).astype(np.uint8)
    raise ValueError(f"unknown artifact kind {kind!r}")


ARTIFACT_KINDS = ("blur", "blank", "scribble")


@dataclass
class SynthTiles:
    images: list[np.ndarray]
    labels: list[str]
    records: list[TileRecord]
    class_names: list[str]


def synth_tiles(spec: SyntheticSpec, out_dir: str | Path | None = None, overwrite: bool = False) -> SynthTiles:
    """Generate a labeled tile set (optionally plus an artifact class)."""
    images: list[np.ndarray] = []
    labels: list[str] = []
    records: list[TileRecord] = []
    class_names = [t.name for t in spec.textures[: spec.n_classes]]

    for ci, texture in enumerate(spec.textures[: spec.n_classes]):
        for ti in range(spec.tiles_per_class):
            rng = np.random.default_rng([spec.seed, ci, ti])
            images.append(render_tile(texture, spec.tile_size, rng))
            labels.append(texture.name)
            records.append(
                TileRecord(
                    slide_id=f"synth{ci}",
                    x=ti * spec.tile_size,
                    y=ci * spec.tile_size,
                    fov_microns=spec.fov_microns,
                    side_px=spec.tile_size,
                    class_label=texture.name,
                )
            )
    n_artifacts = int(round(spec.artifact_fraction * len(images)))
    if n_artifacts:
        class_names.append("artifact")
        for ai in range(n_artifacts):
            rng = np.random.default_rng([spec.seed, 10_000, ai])
            kind = ARTIFACT_KINDS[ai % len(ARTIFACT_KINDS)]
            images.append(render_artifact(kind, spec.tile_size, rng, spec.textures[0]))
            labels.append("artifact")
            records.append(
                TileRecord(
                    slide_id="synth_artifact",
                    x=ai * spec.tile_size,
                    y=0,
                    fov_microns=spec.fov_microns,
                    side_px=spec.tile_size,
                    class_label="artifact",
                )
            )
    if out_dir is not None:
        export_dataset(records, images, out_dir, overwrite=overwrite)
    return SynthTiles(images=images, labels=labels, records=records, class_names=class_names)


@dataclass
class SlideInfo:
    manifest: SlideManifest
    tissue_fraction: float
    tissue_cells: list[tuple[int, int]]
    signal_cells: list[tuple[int, int]]
    annotated_cells: list[tuple[int, int]]


def synth_slide(
    spec: SyntheticSpec,
    slide_id: str,
    class_label: str,
    out_dir: str | Path,
    rng: np.random.Generator,
    normal_texture: ClassTexture | None = None,
    signal_texture: ClassTexture | None = None,
) -> SlideInfo:
    """Compose one slide image from glass, normal, and signal cells.

    Lesion slides carry cell-aligned polygons over a subset of signal cells
    (weak annotation by construction: every annotated cell is signal, not
    every signal cell is annotated). Normal slides have zero polygons.
    """
    g = spec.slide_grid
    size = spec.tile_size
    normal_texture = normal_texture or spec.textures[0]
    is_lesion = class_label != "Normal"
    if is_lesion and signal_texture is None:
        raise ValueError("lesion slides need a signal texture")

    cells = [(i, j) for i in range(g) for j in range(g)]
    n_tissue = int(round(spec.slide_tissue_fraction * g * g))
    tissue_cells = [cells[k] for k in rng.choice(len(cells), size=n_tissue, replace=False)]

    signal_cells: list[tuple[int, int]] = []
    annotated: list[tuple[int, int]] = []
    if is_lesion:
        n_signal = max(1, int(round(spec.signal_fraction * n_tissue)))
        picks = rng.choice(n_tissue, size=n_signal, replace=False)
        signal_cells = [tissue_cells[k] for k in picks]
        n_ann = max(1, int(round(spec.annotation_coverage * n_signal)))
        ann_picks = rng.choice(n_signal, size=n_ann, replace=False)
        annotated = [signal_cells[k] for k in ann_picks]

    image = np.empty((g * size, g * size, 3), dtype=np.uint8)
    signal_set = set(signal_cells)
    tissue_set = set(tissue_cells)
    for i in range(g):
        for j in range(g):
            cell_rng = np.random.default_rng([spec.seed, zlib.crc32(slide_id.encode()), i, j])
            if (i, j) not in tissue_set:
                patch = _glass(size, cell_rng)
            elif (i, j) in signal_set:
                patch = render_tile(signal_texture, size, cell_rng)
            else:
                patch = render_tile(normal_texture, size, cell_rng)
            image[i * size : (i + 1) * size, j * size : (j + 1) * size] = patch

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    image_path = out_dir / f"{slide_id}.png"
    Image.fromarray(image).save(image_path)

    polygons = []
    for i, j in annotated:
        x0, y0 = j * size, i * size
        polygons.append([[x0, y0], [x0 + size, y0], [x0 + size, y0 + size], [x0, y0 + size]])

    manifest = SlideManifest(
        slide_id=slide_id,
        class_label=class_label,
        mpp=spec.mpp,
        image_source=image_path.name,
        roi_polygons=polygons,
    )
    return SlideInfo(
        manifest=manifest,
        tissue_fraction=n_tissue / (g * g),
        tissue_cells=tissue_cells,
        signal_cells=signal_cells,
        annotated_cells=annotated,
    )


def synth_slides(
    spec: SyntheticSpec,
    out_dir: str | Path,
    slides_per_class: int = 4,
    classes: list[str] | None = None,
) -> list[SlideInfo]:
    """A small cohort: Normal slides plus one lesion class per extra texture."""
    if classes is None:
        classes = ["Normal"] + [t.name for t in spec.textures[1 : spec.n_classes]]
    out_dir = Path(out_dir)
    infos = []
    texture_by_name = {t.name: t for t in spec.textures}
    for ci, cls in enumerate(classes):
        for si in range(slides_per_class):
            rng = np.random.default_rng([spec.seed, 777, ci, si])
            info = synth_slide(
                spec,
                slide_id=f"{cls}_{si}",
                class_label=cls,
                out_dir=out_dir,
                rng=rng,
                normal_texture=spec.textures[0],
                signal_texture=texture_by_name.get(cls) if cls != "Normal" else None,
            )
            infos.append(info)
    save_slide_manifests([info.manifest for info in infos], out_dir / "slides.json")
    return infos
