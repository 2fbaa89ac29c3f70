"""Silhouette masks, the exact Euclidean distance transform, and power
emphasis.

The silhouette is the dark foreground of the content image. Every other
pixel gets the exact Euclidean distance to its nearest silhouette pixel
(pixel-center metric); raising those distances to a power n makes far
background pixels much more expensive for the optimizer to touch than
pixels hugging the shape.
"""

import math
from dataclasses import dataclass

import numpy as np

from .accel import USE_NUMBA
from .imageio import Image, _round_u8

if USE_NUMBA:
    from ._kernels_numba import edt_sq as _edt_sq
else:
    from ._kernels_numpy import edt_sq as _edt_sq


@dataclass(frozen=True)
class BinaryMask:
    """bits: (h, w) bool, True = silhouette (foreground)."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.ascontiguousarray(self.bits)
        if bits.dtype != np.bool_ or bits.ndim != 2:
            raise ValueError(f"mask bits must be a 2-d bool array, got {bits.dtype} {bits.shape}")
        object.__setattr__(self, "bits", bits)

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]


@dataclass(frozen=True)
class DistanceField:
    """Per-pixel distances (possibly power-emphasized); exactly 0 on
    silhouette pixels."""

    values: np.ndarray
    emphasis_power: int = 1
    normalized: bool = False

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError(f"field values must be 2-d, got shape {values.shape}")
        if not np.isfinite(values).all() or (values < 0.0).any():
            raise ValueError("field values must be finite and non-negative")
        if self.normalized and (values > 1.0).any():
            raise ValueError("normalized field values must not exceed 1")
        object.__setattr__(self, "values", values)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


def binarize(img: Image, threshold: float = 0.5, invert: bool = False) -> BinaryMask:
    """Silhouette = Rec.601 luminance / 255 below threshold; invert flips
    the mask, which synthesizes style into the background instead."""
    px = img.pixels.astype(np.float64)
    luma = (0.299 * px[..., 0] + 0.587 * px[..., 1] + 0.114 * px[..., 2]) / 255.0
    bits = luma < threshold
    if invert:
        bits = ~bits
    return BinaryMask(bits)


def edt_squared(mask: BinaryMask) -> np.ndarray:
    """Exact squared Euclidean distances as float64-held integers."""
    if not mask.bits.any():
        raise ValueError("mask has no silhouette pixels; the distance transform is undefined")
    return _edt_sq(mask.bits.astype(np.uint8))


def edt(mask: BinaryMask) -> DistanceField:
    return DistanceField(np.sqrt(edt_squared(mask)), emphasis_power=1, normalized=False)


def emphasize(field: DistanceField, n: int, normalize: bool = False) -> DistanceField:
    """Raise non-silhouette distances to the power n (silhouette pixels stay
    exactly 0). With normalize, distances are first divided by the image
    diagonal so the emphasized field never exceeds 1."""
    if field.emphasis_power != 1:
        raise ValueError("field is already emphasized")
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise ValueError(f"emphasis power must be an integer >= 1, got {n!r}")
    values = field.values.copy()
    if normalize:
        values /= math.hypot(field.width, field.height)
    if n > 1:
        values **= int(n)
    return DistanceField(values, emphasis_power=int(n), normalized=normalize)


def mask_to_image(mask: BinaryMask) -> Image:
    """Silhouette black on white, like the clip-art inputs."""
    gray = np.where(mask.bits, 0, 255).astype(np.uint8)
    return Image(np.repeat(gray[..., None], 3, axis=2))


def render_field(field: DistanceField) -> Image:
    """Min-max scaled grayscale view: silhouette white, far background dark."""
    v = field.values
    lo = float(v.min())
    hi = float(v.max())
    scaled = (v - lo) / (hi - lo) if hi > lo else np.zeros_like(v)
    gray = _round_u8((1.0 - scaled) * 255.0)
    return Image(np.repeat(gray[..., None], 3, axis=2))
