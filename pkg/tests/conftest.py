import struct
import zlib
from pathlib import Path

import numpy as np
import pytest

from dtstyle.extractor import NetworkWeights, load_weights, spec_for_weights
from dtstyle.imageio import Image
from dtstyle.numerics import ConvLayer

FIXTURE_DIR = Path(__file__).parent / "fixtures"
TINY_FIXTURE = FIXTURE_DIR / "tiny.cnstw"


def write_cnstw_bytes(layers) -> bytes:
    """Independent writer for the portable weight format, used as the
    loader's oracle. layers: iterable of (name, kernel(o,i,kh,kw), bias(o,))."""
    out = bytearray(b"CNSTW001")
    layers = list(layers)
    out += struct.pack("<I", len(layers))
    for name, kernel, bias in layers:
        encoded = name.encode("utf-8")
        o, i, kh, kw = kernel.shape
        out += struct.pack("<H", len(encoded))
        out += encoded
        out += struct.pack("<IIII", o, i, kh, kw)
        out += np.ascontiguousarray(kernel, dtype="<f4").tobytes()
        out += np.ascontiguousarray(bias, dtype="<f4").tobytes()
    out += struct.pack("<I", zlib.crc32(bytes(out)))
    return bytes(out)


def random_tiny_layers(seed: int):
    """2-layer test network: 3->4 conv, relu, 4->4 conv, relu."""
    rng = np.random.default_rng(seed)
    return [
        ("conv1_1", rng.uniform(-0.1, 0.1, (4, 3, 3, 3)).astype(np.float32), rng.uniform(-0.1, 0.1, 4).astype(np.float32)),
        ("conv1_2", rng.uniform(-0.1, 0.1, (4, 4, 3, 3)).astype(np.float32), rng.uniform(-0.1, 0.1, 4).astype(np.float32)),
    ]


def tiny_weights_from_seed(seed: int) -> NetworkWeights:
    layers = {name: ConvLayer(name, k, b) for name, k, b in random_tiny_layers(seed)}
    return NetworkWeights(layers)


@pytest.fixture(scope="session")
def tiny_weights() -> NetworkWeights:
    return load_weights(TINY_FIXTURE)


@pytest.fixture(scope="session")
def tiny_spec(tiny_weights):
    return spec_for_weights(tiny_weights)


def disc_image(size: int, radius: float | None = None) -> Image:
    """Black disc on white, centered."""
    if radius is None:
        radius = size / 4
    yy, xx = np.mgrid[0:size, 0:size]
    center = (size - 1) / 2
    inside = (yy - center) ** 2 + (xx - center) ** 2 <= radius ** 2
    px = np.where(inside[..., None], 0, 255).astype(np.uint8)
    return Image(np.repeat(px, 3, axis=2) if px.shape[2] == 1 else px)


def checker_image(size: int, cell: int = 8) -> Image:
    """High-contrast black/white checkerboard."""
    yy, xx = np.mgrid[0:size, 0:size]
    on = ((yy // cell) + (xx // cell)) % 2 == 0
    gray = np.where(on, 255, 0).astype(np.uint8)
    return Image(np.repeat(gray[..., None], 3, axis=2))


def central_fd(scalar_fn, x: np.ndarray, step: float = 1e-3,
               coords=None) -> np.ndarray:
    """Central finite differences of scalar_fn at x, optionally restricted
    to a list of flat coordinates (other entries come back 0)."""
    flat = x.ravel()
    grad = np.zeros_like(flat)
    indices = range(flat.size) if coords is None else coords
    for idx in indices:
        orig = flat[idx]
        flat[idx] = orig + step
        hi = scalar_fn(x)
        flat[idx] = orig - step
        lo = scalar_fn(x)
        flat[idx] = orig
        grad[idx] = (hi - lo) / (2.0 * step)
    return grad.reshape(x.shape)


def max_rel_err(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float((np.abs(analytic - numeric) / denom).max())
