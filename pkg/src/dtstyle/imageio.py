"""Decode, encode, resize, and normalize raster images.

Display images are 8-bit RGB; the optimizer works on float64 tensors of
shape (3, h, w) with a per-channel mean removed and an optional BGR channel
swap, matching the convention the feature-extractor weights were trained
with. `to_tensor`/`from_tensor` are exact inverses for every 8-bit image.
"""

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as pil_image
from PIL import UnidentifiedImageError

from .errors import CorruptImageError, UnreadableFileError, UnsupportedFormatError

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_JPEG_MAGIC = b"\xff\xd8\xff"


@dataclass(frozen=True)
class Image:
    """8-bit RGB raster: pixels is a (height, width, 3) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.ascontiguousarray(self.pixels)
        if px.dtype != np.uint8 or px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"pixels must be (h, w, 3) uint8, got {px.dtype} {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class Preprocess:
    """Channel means (in output channel order) and the channel order the
    tensor domain uses."""

    channel_mean: tuple[float, float, float]
    channel_order: str = "BGR"

    def __post_init__(self):
        if self.channel_order not in ("RGB", "BGR"):
            raise ValueError(f"channel_order must be RGB or BGR, got {self.channel_order!r}")
        if len(self.channel_mean) != 3 or not all(0.0 <= m <= 255.0 for m in self.channel_mean):
            raise ValueError("channel_mean needs 3 values in [0, 255]")


# classic ImageNet convention of the pretrained extractor: BGR order,
# per-channel means in BGR
VGG_PREPROCESS = Preprocess((103.939, 116.779, 123.68), "BGR")


def _round_u8(values: np.ndarray) -> np.ndarray:
    # half away from zero; values are clamped non-negative first so this is
    # plain floor(v + 0.5)
    return np.floor(np.clip(values, 0.0, 255.0) + 0.5).astype(np.uint8)


def _decoded_to_rgb(decoded) -> Image:
    if decoded.mode == "RGB":
        return Image(np.asarray(decoded, dtype=np.uint8))
    has_alpha = "A" in decoded.mode or (decoded.mode == "P" and "transparency" in decoded.info)
    if has_alpha:
        rgba = np.asarray(decoded.convert("RGBA"), dtype=np.float64)
        alpha = rgba[..., 3:] / 255.0
        composed = rgba[..., :3] * alpha + 255.0 * (1.0 - alpha)
        return Image(_round_u8(composed))
    return Image(np.asarray(decoded.convert("RGB"), dtype=np.uint8))


def load_image(path) -> Image:
    """Decode a PNG or JPEG file to 8-bit RGB.

    Grayscale is replicated across channels; alpha is composited over
    white. Unreadable files, non-PNG/JPEG content, and corrupt streams
    raise distinct errors.
    """
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise UnreadableFileError(f"cannot read {path}: {exc}") from exc
    claims_known_format = raw.startswith(_PNG_MAGIC) or raw.startswith(_JPEG_MAGIC)
    try:
        with pil_image.open(io.BytesIO(raw)) as decoded:
            if decoded.format not in ("PNG", "JPEG"):
                raise UnsupportedFormatError(
                    f"{path}: {decoded.format or 'unknown format'} is not PNG or JPEG")
            decoded.load()
            return _decoded_to_rgb(decoded)
    except UnidentifiedImageError as exc:
        if claims_known_format:
            raise CorruptImageError(f"{path}: stream does not decode: {exc}") from exc
        raise UnsupportedFormatError(f"{path}: not a PNG or JPEG file") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptImageError(f"{path}: stream does not decode: {exc}") from exc


def save_png(img: Image, path) -> None:
    """Write 8-bit RGB PNG, non-interlaced."""
    pil_image.fromarray(img.pixels, "RGB").save(str(path), format="PNG")


def _sample_axis(n_src: int, n_dst: int):
    # half-pixel centers with edge clamping
    pos = (np.arange(n_dst, dtype=np.float64) + 0.5) * (n_src / n_dst) - 0.5
    lo_raw = np.floor(pos)
    frac = pos - lo_raw
    lo = np.clip(lo_raw.astype(np.int64), 0, n_src - 1)
    hi = np.clip(lo_raw.astype(np.int64) + 1, 0, n_src - 1)
    return lo, hi, frac


def resize_bilinear(img: Image, new_width: int, new_height: int) -> Image:
    if new_width < 1 or new_height < 1:
        raise ValueError(f"target size must be at least 1x1, got {new_width}x{new_height}")
    if new_width == img.width and new_height == img.height:
        return Image(img.pixels.copy())
    src = img.pixels.astype(np.float64)
    ly, hy, fy = _sample_axis(img.height, new_height)
    rows = src[ly] * (1.0 - fy)[:, None, None] + src[hy] * fy[:, None, None]
    lx, hx, fx = _sample_axis(img.width, new_width)
    out = rows[:, lx] * (1.0 - fx)[None, :, None] + rows[:, hx] * fx[None, :, None]
    return Image(_round_u8(out))


def to_tensor(img: Image, prep: Preprocess = VGG_PREPROCESS) -> np.ndarray:
    """(h, w, 3) uint8 -> (3, h, w) float64, channel-swapped and mean-shifted."""
    arr = img.pixels.astype(np.float64)
    if prep.channel_order == "BGR":
        arr = arr[:, :, ::-1]
    mean = np.asarray(prep.channel_mean, dtype=np.float64)
    return np.ascontiguousarray(arr.transpose(2, 0, 1) - mean[:, None, None])


def from_tensor(t: np.ndarray, prep: Preprocess = VGG_PREPROCESS) -> Image:
    """Inverse of to_tensor: re-add the mean, restore RGB order, clamp to
    [0, 255], round half away from zero."""
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 3 or t.shape[0] != 3:
        raise ValueError(f"expected a (3, h, w) tensor, got shape {t.shape}")
    mean = np.asarray(prep.channel_mean, dtype=np.float64)
    arr = (t + mean[:, None, None]).transpose(1, 2, 0)
    if prep.channel_order == "BGR":
        arr = arr[:, :, ::-1]
    return Image(_round_u8(arr))
