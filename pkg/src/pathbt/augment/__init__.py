from .kernels import (
    IMAGENET_MEAN,
    IMAGENET_STD,
    adjust_brightness,
    adjust_contrast,
    adjust_hue,
    adjust_saturation,
    affine,
    color_jitter,
    crop_resize,
    gaussian_blur,
    grayscale,
    hflip,
    normalize,
    posterize,
    resize,
    rotate,
    solarize,
    vflip,
)
from .policy import (
    AugmentationPolicy,
    TransformSpec,
    apply_policy,
    apply_transform,
    basic_policy,
    builtin_policies,
    derive_rng,
    get_policy,
    pathology_policy,
    validate_spec,
)

__all__ = [
    "IMAGENET_MEAN",
    "IMAGENET_STD",
    "adjust_brightness",
    "adjust_contrast",
    "adjust_hue",
    "adjust_saturation",
    "affine",
    "color_jitter",
    "crop_resize",
    "gaussian_blur",
    "grayscale",
    "hflip",
    "normalize",
    "posterize",
    "resize",
    "rotate",
    "solarize",
    "vflip",
    "AugmentationPolicy",
    "TransformSpec",
    "apply_policy",
    "apply_transform",
    "basic_policy",
    "builtin_policies",
    "derive_rng",
    "get_policy",
    "pathology_policy",
    "validate_spec",
]
