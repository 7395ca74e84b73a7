"""Two-branch augmentation policies built from parameterized transform specs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels

KINDS = (
    "crop_resize",
    "hflip",
    "vflip",
    "color_jitter",
    "grayscale",
    "gaussian_blur",
    "solarize",
    "posterize",
    "rotate",
    "affine",
    "normalize",
)

# crop_resize and normalize shape the output contract and always fire
STRUCTURAL_KINDS = ("crop_resize", "normalize")


@dataclass(frozen=True)
class TransformSpec:
    kind: str
    probability: float = 1.0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        validate_spec(self)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "probability": self.probability, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "TransformSpec":
        return cls(kind=d["kind"], probability=float(d.get("probability", 1.0)), params=dict(d.get("params", {})))


def validate_spec(spec: TransformSpec) -> None:
    if spec.kind not in KINDS:
        raise ValueError(f"{spec.kind}: unknown transform kind")
    if not 0.0 <= spec.probability <= 1.0:
        raise ValueError(f"{spec.kind}: probability outside [0, 1]")
    p = spec.params
    try:
        if spec.kind == "solarize":
            t = p["threshold"]
            if not 0 <= t <= 255:
                raise ValueError("threshold outside [0, 255]")
        elif spec.kind == "posterize":
            b = p["bits"]
            if not 1 <= b <= 8:
                raise ValueError("bits outside [1, 8]")
        elif spec.kind == "rotate":
            if not 0 <= p["max_degrees"] <= 360:
                raise ValueError("max_degrees outside [0, 360]")
        elif spec.kind == "affine":
            if not 0 <= p["max_degrees"] <= 360:
                raise ValueError("max_degrees outside [0, 360]")
            tf = p["translate_frac"]
            if len(tf) != 2 or not all(0 <= v <= 1 for v in tf):
                raise ValueError("translate_frac components must lie in [0, 1]")
        elif spec.kind == "color_jitter":
            for key in ("brightness", "contrast", "saturation"):
                if p.get(key, 0.0) < 0:
                    raise ValueError(f"{key} must be >= 0")
            if not 0 <= p.get("hue", 0.0) <= 0.5:
                raise ValueError("hue outside [0, 0.5]")
        elif spec.kind == "gaussian_blur":
            lo, hi = p["sigma_range"]
            if not 0 < lo <= hi:
                raise ValueError("sigma_range must be positive and ordered")
        elif spec.kind == "crop_resize":
            if int(p["out_size"]) < 1:
                raise ValueError("out_size must be >= 1")
            lo, hi = p.get("scale_range", (0.08, 1.0))
            if not (0.0 < lo <= hi <= 1.0):
                raise ValueError("scale_range outside (0, 1]")
        elif spec.kind == "normalize":
            mean = p.get("mean", kernels.IMAGENET_MEAN)
            std = p.get("std", kernels.IMAGENET_STD)
            if len(mean) != 3 or len(std) != 3 or any(s == 0 for s in std):
                raise ValueError("mean/std must be 3-vectors with nonzero std")
    except KeyError as exc:
        raise ValueError(f"{spec.kind}: missing parameter {exc}") from None
    except ValueError as exc:
        raise ValueError(f"{spec.kind}: {exc}") from None


def apply_transform(image: np.ndarray, spec: TransformSpec, rng: np.random.Generator) -> np.ndarray:
    p = spec.params
    if spec.kind == "hflip":
        return kernels.hflip(image)
    if spec.kind == "vflip":
        return kernels.vflip(image)
    if spec.kind == "solarize":
        return kernels.solarize(image, int(p["threshold"]))
    if spec.kind == "posterize":
        return kernels.posterize(image, int(p["bits"]))
    if spec.kind == "grayscale":
        return kernels.grayscale(image)
    if spec.kind == "gaussian_blur":
        lo, hi = p["sigma_range"]
        return kernels.gaussian_blur(image, float(rng.uniform(lo, hi)))
    if spec.kind == "rotate":
        return kernels.rotate(image, float(rng.uniform(0.0, p["max_degrees"])))
    if spec.kind == "affine":
        degrees = float(rng.uniform(0.0, p["max_degrees"]))
        fx, fy = p["translate_frac"]
        h, w = image.shape[:2]
        tx = float(rng.uniform(-fx * w, fx * w))
        ty = float(rng.uniform(-fy * h, fy * h))
        return kernels.affine(image, degrees, (tx, ty))
    if spec.kind == "color_jitter":
        return kernels.color_jitter(
            image,
            rng,
            brightness=p.get("brightness", 0.0),
            contrast=p.get("contrast", 0.0),
            saturation=p.get("saturation", 0.0),
            hue=p.get("hue", 0.0),
        )
    if spec.kind == "crop_resize":
        return kernels.crop_resize(
            image, rng, int(p["out_size"]), tuple(p.get("scale_range", (0.08, 1.0)))
        )
    if spec.kind == "normalize":
        return kernels.normalize(
            image, p.get("mean", kernels.IMAGENET_MEAN), p.get("std", kernels.IMAGENET_STD)
        )
    raise ValueError(f"{spec.kind}: unknown transform kind")


def apply_policy(image: np.ndarray, branch: list[TransformSpec], rng: np.random.Generator) -> np.ndarray:
    """Run one branch: each transform fires independently with its probability.

    The trailing crop_resize/normalize pair always fires, so the output is a
    float32 array of shape (out_size, out_size, 3).
    """
    for spec in branch:
        validate_spec(spec)
        if spec.kind in STRUCTURAL_KINDS or rng.random() < spec.probability:
            image = apply_transform(image, spec, rng)
    return image


@dataclass
class AugmentationPolicy:
    """Named pair of ordered transform branches producing the two views."""

    name: str
    branch_a: list[TransformSpec]
    branch_b: list[TransformSpec]

    def __post_init__(self):
        for label, branch in (("branch_a", self.branch_a), ("branch_b", self.branch_b)):
            if len(branch) < 2 or branch[-2].kind != "crop_resize" or branch[-1].kind != "normalize":
                raise ValueError(f"{label} must end with crop_resize followed by normalize")
        if self.out_size(self.branch_a) != self.out_size(self.branch_b):
            raise ValueError("both branches must crop to a common out_size")

    @staticmethod
    def out_size(branch: list[TransformSpec]) -> int:
        return int(branch[-2].params["out_size"])

    @property
    def output_size(self) -> int:
        return self.out_size(self.branch_a)

    def to_json(self) -> str:
        payload = {
            "name": self.name,
            "branch_a": [s.to_dict() for s in self.branch_a],
            "branch_b": [s.to_dict() for s in self.branch_b],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "AugmentationPolicy":
        payload = json.loads(text)
        return cls(
            name=payload["name"],
            branch_a=[TransformSpec.from_dict(d) for d in payload["branch_a"]],
            branch_b=[TransformSpec.from_dict(d) for d in payload["branch_b"]],
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "AugmentationPolicy":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _crop(out_size: int, scale_range: tuple[float, float]) -> TransformSpec:
    return TransformSpec("crop_resize", 1.0, {"out_size": out_size, "scale_range": list(scale_range)})


def _norm() -> TransformSpec:
    return TransformSpec("normalize", 1.0, {"mean": list(kernels.IMAGENET_MEAN), "std": list(kernels.IMAGENET_STD)})


def basic_policy(out_size: int = 224) -> AugmentationPolicy:
    """Natural-image two-view recipe: strong jitter, grayscale, blur, and
    solarization at threshold 128 on the second branch only."""
    jitter = TransformSpec(
        "color_jitter", 0.8, {"brightness": 0.4, "contrast": 0.4, "saturation": 0.2, "hue": 0.1}
    )
    shared = [TransformSpec("hflip", 0.5), jitter, TransformSpec("grayscale", 0.2)]
    branch_a = shared + [
        TransformSpec("gaussian_blur", 1.0, {"sigma_range": [0.1, 2.0]}),
        _crop(out_size, (0.08, 1.0)),
        _norm(),
    ]
    branch_b = shared + [
        TransformSpec("gaussian_blur", 0.1, {"sigma_range": [0.1, 2.0]}),
        TransformSpec("solarize", 0.2, {"threshold": 128}),
        _crop(out_size, (0.08, 1.0)),
        _norm(),
    ]
    return AugmentationPolicy(name="basic", branch_a=branch_a, branch_b=branch_b)


def pathology_policy(out_size: int = 224) -> AugmentationPolicy:
    """Stain-preserving recipe: both flips, weak jitter, high-threshold
    solarization and 7-bit posterization on one branch, rotations and affine
    warps, no grayscale or blur, symmetric crop sizes with moderate rescale."""
    weak_jitter = TransformSpec(
        "color_jitter", 0.8, {"brightness": 0.2, "contrast": 0.2, "saturation": 0.1, "hue": 0.02}
    )
    geometry = [
        TransformSpec("rotate", 0.5, {"max_degrees": 180.0}),
        TransformSpec("affine", 0.5, {"max_degrees": 45.0, "translate_frac": [0.5, 0.5]}),
    ]
    flips = [TransformSpec("hflip", 0.5), TransformSpec("vflip", 0.5)]
    branch_a = flips + [weak_jitter] + geometry + [_crop(out_size, (0.4, 1.0)), _norm()]
    branch_b = (
        flips
        + [
            weak_jitter,
            TransformSpec("solarize", 0.2, {"threshold": 250}),
            TransformSpec("posterize", 0.2, {"bits": 7}),
        ]
        + geometry
        + [_crop(out_size, (0.4, 1.0)), _norm()]
    )
    return AugmentationPolicy(name="pathbt", branch_a=branch_a, branch_b=branch_b)


def builtin_policies(out_size: int = 224) -> dict[str, AugmentationPolicy]:
    return {"basic": basic_policy(out_size), "pathbt": pathology_policy(out_size)}


def get_policy(name_or_path: str, out_size: int = 224) -> AugmentationPolicy:
    """Resolve a builtin policy name or load a policy JSON file."""
    builtin = builtin_policies(out_size)
    if name_or_path in builtin:
        return builtin[name_or_path]
    path = Path(name_or_path)
    if path.exists():
        return AugmentationPolicy.load(path)
    raise ValueError(f"unknown policy {name_or_path!r} (not builtin, not a file)")


def derive_rng(seed: int, *stream: int) -> np.random.Generator:
    """Independent generator for one (seed, epoch, sample, branch, ...) slot."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, *map(int, stream)]))
