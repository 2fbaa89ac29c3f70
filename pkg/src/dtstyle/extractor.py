"""VGG-style feature extractor built from the numerics primitives.

A network is an ordered list of stages (conv name, "relu", "pool") plus a
weight map. `forward` runs an input through the stages up to the deepest
requested conv layer and keeps everything the exact backward pass needs;
`backward_to_input` carries gradients injected at requested layers back to
the input pixels. Feature maps are taken post-ReLU.

Weights travel in the portable CNSTW001 container (little-endian):
magic "CNSTW001", u32 layer count, then per layer u16 name length, UTF-8
name, u32 out/in/kernel_h/kernel_w, float32 kernel (out-major row-major)
and float32 bias, with a trailing CRC-32 of everything before it.
"""

import re
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    BadMagicError,
    ChecksumError,
    ShapeMismatchError,
    TruncatedFileError,
    VersionMismatchError,
    WeightFileError,
)
from .numerics import (
    ConvLayer,
    PoolRecord,
    Tensor3,
    as_tensor3,
    conv2d_backward_input,
    conv2d_forward,
    pool2x2_backward,
    pool2x2_forward,
    relu_backward,
    relu_forward,
)

MAGIC = b"CNSTW"
VERSION = b"001"

STAGE_RELU = "relu"
STAGE_POOL = "pool"

_CONV_NAME = re.compile(r"^conv(\d+)_(\d+)$")

# block widths of the canonical 19-layer network, truncated after conv5_1
_VGG19_BLOCKS = ((64, 2), (128, 2), (256, 4), (512, 4), (512, 1))


@dataclass(frozen=True)
class NetworkSpec:
    """Ordered stages and the expected (in, out) channels per conv."""

    stages: tuple[str, ...]
    conv_channels: dict[str, tuple[int, int]]
    pool_mode: str = "max"

    def __post_init__(self):
        prev = None
        for stage in self.stages:
            if stage == STAGE_RELU:
                if prev is None or prev in (STAGE_RELU, STAGE_POOL):
                    raise ValueError("relu stage must directly follow a conv stage")
            elif stage == STAGE_POOL:
                if prev != STAGE_RELU:
                    raise ValueError("pool stage must follow a relu stage")
            elif stage not in self.conv_channels:
                raise ValueError(f"conv stage {stage!r} has no channel entry")
            prev = stage
        names = self.conv_names
        if len(set(names)) != len(names):
            raise ValueError("conv layer names must be unique")

    @property
    def conv_names(self) -> tuple[str, ...]:
        return tuple(s for s in self.stages if s not in (STAGE_RELU, STAGE_POOL))

    @property
    def pool_count(self) -> int:
        return sum(1 for s in self.stages if s == STAGE_POOL)

    @property
    def in_channels(self) -> int:
        return self.conv_channels[self.conv_names[0]][0]


@dataclass(frozen=True)
class NetworkWeights:
    """Conv layers keyed by name, in file order."""

    layers: dict[str, ConvLayer]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.layers)


@dataclass(frozen=True)
class FeatureBundle:
    """Detached feature maps keyed by layer name."""

    features: dict[str, Tensor3]

    def __post_init__(self):
        if not self.features:
            raise ValueError("feature bundle must not be empty")

    def __getitem__(self, name: str) -> Tensor3:
        return self.features[name]


@dataclass(frozen=True)
class ForwardTrace:
    """Stored stage payloads and post-ReLU maps for the requested layers."""

    spec: NetworkSpec
    records: tuple  # per executed stage: ("conv", ConvLayer) | ("relu", input) | ("pool", PoolRecord)
    features: dict[str, Tensor3]
    inject_stage: dict[str, int]  # layer name -> executed stage index of its relu
    input_shape: tuple[int, int, int]


def vgg19_spec(pool_mode: str = "max") -> NetworkSpec:
    stages: list[str] = []
    conv_channels: dict[str, tuple[int, int]] = {}
    in_ch = 3
    for block, (width, count) in enumerate(_VGG19_BLOCKS, start=1):
        if block > 1:
            stages.append(STAGE_POOL)
        for j in range(1, count + 1):
            name = f"conv{block}_{j}"
            stages += [name, STAGE_RELU]
            conv_channels[name] = (in_ch, width)
            in_ch = width
    return NetworkSpec(tuple(stages), conv_channels, pool_mode)


def spec_for_weights(weights: NetworkWeights, pool_mode: str = "max") -> NetworkSpec:
    """Build the stage list implied by canonical conv{block}_{index} names:
    a ReLU after every conv, a pool wherever the block number steps up."""
    stages: list[str] = []
    conv_channels: dict[str, tuple[int, int]] = {}
    prev_block = None
    prev_out = None
    for name, layer in weights.layers.items():
        m = _CONV_NAME.match(name)
        if not m:
            raise WeightFileError(f"layer name {name!r} is not of the form conv<block>_<index>")
        block = int(m.group(1))
        if prev_block is not None and block < prev_block:
            raise WeightFileError(f"layer {name!r} is out of canonical order")
        if prev_block is not None and block > prev_block:
            stages.append(STAGE_POOL)
        if prev_out is not None and layer.in_channels != prev_out:
            raise WeightFileError(
                f"{name}: expects {layer.in_channels} input channels but the previous layer emits {prev_out}")
        stages += [name, STAGE_RELU]
        conv_channels[name] = (layer.in_channels, layer.out_channels)
        prev_block = block
        prev_out = layer.out_channels
    if not stages:
        raise WeightFileError("weight file contains no layers")
    return NetworkSpec(tuple(stages), conv_channels, pool_mode)


def load_weights(path) -> NetworkWeights:
    """Read and validate a CNSTW001 file. Bad magic, wrong version, invalid
    shapes, truncation, and checksum failures raise distinct errors."""
    data = Path(path).read_bytes()
    if len(data) < 8:
        raise TruncatedFileError(f"{path}: shorter than the 8-byte magic")
    if data[:5] != MAGIC:
        raise BadMagicError(f"{path}: not a CNSTW weight file")
    if data[5:8] != VERSION:
        raise VersionMismatchError(
            f"{path}: container version {data[5:8]!r}, this reader understands {VERSION!r}")
    if len(data) < 16:
        raise TruncatedFileError(f"{path}: too short for a layer count and checksum")
    body, crc_bytes = data[:-4], data[-4:]
    offset = 8

    def take(n: int, what: str) -> bytes:
        nonlocal offset
        if offset + n > len(body):
            raise TruncatedFileError(f"{path}: ends inside {what}")
        chunk = body[offset:offset + n]
        offset += n
        return chunk

    (count,) = struct.unpack("<I", take(4, "the layer count"))
    layers: dict[str, ConvLayer] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", take(2, "a layer name length"))
        name = take(name_len, "a layer name").decode("utf-8")
        out_ch, in_ch, kh, kw = struct.unpack("<IIII", take(16, f"{name}: layer header"))
        if kh != 3 or kw != 3:
            raise ShapeMismatchError(f"{path}: {name}: kernel is {kh}x{kw}, only 3x3 is supported")
        if out_ch < 1 or in_ch < 1:
            raise ShapeMismatchError(f"{path}: {name}: channel counts must be positive")
        kernel_bytes = take(out_ch * in_ch * kh * kw * 4, f"{name}: kernel data")
        bias_bytes = take(out_ch * 4, f"{name}: bias data")
        if name in layers:
            raise WeightFileError(f"{path}: duplicate layer name {name!r}")
        kernel = np.frombuffer(kernel_bytes, dtype="<f4").astype(np.float64).reshape(out_ch, in_ch, kh, kw)
        bias = np.frombuffer(bias_bytes, dtype="<f4").astype(np.float64)
        layers[name] = ConvLayer(name, kernel, bias)
    if offset != len(body):
        raise WeightFileError(f"{path}: {len(body) - offset} unexpected trailing bytes before the checksum")
    (stored_crc,) = struct.unpack("<I", crc_bytes)
    if zlib.crc32(body) != stored_crc:
        raise ChecksumError(f"{path}: CRC-32 mismatch, file is corrupt")
    return NetworkWeights(layers)


def _relu_stage_index(spec: NetworkSpec) -> dict[str, int]:
    index: dict[str, int] = {}
    last_conv = None
    for i, stage in enumerate(spec.stages):
        if stage == STAGE_RELU:
            index[last_conv] = i
        elif stage != STAGE_POOL:
            last_conv = stage
    return index


def forward(x: Tensor3, weights: NetworkWeights, spec: NetworkSpec,
            request: Iterable[str]) -> ForwardTrace:
    """Run x through the stages, stopping after the deepest requested
    layer's ReLU. The trace keeps every payload the backward pass needs."""
    x = as_tensor3(x)
    request = frozenset(request)
    if not request:
        raise ValueError("request at least one layer")
    known = set(spec.conv_names)
    unknown = request - known
    if unknown:
        raise ValueError(f"unknown layer name(s): {sorted(unknown)}")
    relu_index = _relu_stage_index(spec)
    deepest = max(relu_index[name] for name in request)

    records: list = []
    features: dict[str, Tensor3] = {}
    inject_stage: dict[str, int] = {}
    cur = x
    last_conv = None
    for i, stage in enumerate(spec.stages[:deepest + 1]):
        if stage == STAGE_RELU:
            records.append((STAGE_RELU, cur))
            cur = relu_forward(cur)
            if last_conv in request:
                features[last_conv] = cur
                inject_stage[last_conv] = i
        elif stage == STAGE_POOL:
            cur, rec = pool2x2_forward(cur, spec.pool_mode)
            records.append((STAGE_POOL, rec))
        else:
            layer = weights.layers.get(stage)
            if layer is None:
                raise ValueError(f"weights are missing layer {stage!r}")
            expected_in, expected_out = spec.conv_channels[stage]
            if (layer.in_channels, layer.out_channels) != (expected_in, expected_out):
                raise ValueError(
                    f"{stage}: weights are {layer.in_channels}->{layer.out_channels}, "
                    f"spec says {expected_in}->{expected_out}")
            records.append(("conv", layer))
            cur = conv2d_forward(cur, layer)
            last_conv = stage
    return ForwardTrace(spec, tuple(records), features, inject_stage, x.shape)


def detach(trace: ForwardTrace) -> FeatureBundle:
    """Copy the requested maps out of the trace (value semantics)."""
    return FeatureBundle({name: fmap.copy() for name, fmap in trace.features.items()})


def backward_to_input(trace: ForwardTrace, layer_grads: Mapping[str, Tensor3]) -> Tensor3:
    """Chain gradients injected at requested layers back to the input.
    Gradients at multiple layers accumulate additively through shared
    stages."""
    by_stage: dict[int, Tensor3] = {}
    for name, g in layer_grads.items():
        if name not in trace.features:
            raise ValueError(f"layer {name!r} was not requested in this trace")
        g = as_tensor3(g)
        if g.shape != trace.features[name].shape:
            raise ValueError(
                f"{name}: gradient shape {g.shape} does not match feature shape {trace.features[name].shape}")
        by_stage[trace.inject_stage[name]] = g

    deepest_feature = trace.features[max(trace.inject_stage, key=trace.inject_stage.get)]
    grad = np.zeros_like(deepest_feature)
    for i in range(len(trace.records) - 1, -1, -1):
        if i in by_stage:
            grad = grad + by_stage[i]
        kind, payload = trace.records[i]
        if kind == STAGE_RELU:
            grad = relu_backward(grad, payload)
        elif kind == STAGE_POOL:
            grad = pool2x2_backward(grad, payload)
        else:
            grad = conv2d_backward_input(grad, payload)
    return grad


def standard_probe_input() -> Tensor3:
    """Fixed 3x8x8 pattern used to cross-check weight conversions between
    tools: value(c, y, x) = ((64c + 8y + x) mod 23 - 11) / 11."""
    idx = np.arange(3 * 8 * 8, dtype=np.float64).reshape(3, 8, 8)
    return (np.mod(idx, 23.0) - 11.0) / 11.0


def probe_response(weights: NetworkWeights) -> tuple[str, Tensor3]:
    """Post-ReLU response of the first conv layer to the standard probe."""
    first = next(iter(weights.layers.values()))
    if first.in_channels != 3:
        raise ValueError(f"{first.name}: probe input has 3 channels, layer expects {first.in_channels}")
    return first.name, relu_forward(conv2d_forward(standard_probe_input(), first))
