"""Dense tensor primitives with analytic backward passes.

Tensors are plain numpy float64 arrays shaped (channels, height, width).
Convolutions are fixed at 3x3, stride 1, zero padding 1; pooling is 2x2.
That is all the feature extractor needs, and it keeps every adjoint small
enough to verify against finite differences.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .accel import USE_NUMBA

if USE_NUMBA:
    from . import _kernels_numba as _k
else:
    from . import _kernels_numpy as _k

Tensor3 = np.ndarray  # (channels, height, width) float64

POOL_MAX = "max"
POOL_AVERAGE = "average"


def as_tensor3(data) -> Tensor3:
    """Coerce to a contiguous float64 (c, h, w) array."""
    t = np.ascontiguousarray(data, dtype=np.float64)
    if t.ndim != 3:
        raise ValueError(f"expected a 3-d tensor, got shape {t.shape}")
    return t


def require_finite(t: np.ndarray, what: str = "tensor") -> None:
    if not np.isfinite(t).all():
        raise ValueError(f"{what} contains NaN or Inf")


@dataclass(frozen=True)
class ConvLayer:
    """A named 3x3 convolution: kernel (out, in, 3, 3) and bias (out,)."""

    name: str
    kernel: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        kernel = np.ascontiguousarray(self.kernel, dtype=np.float64)
        bias = np.ascontiguousarray(self.bias, dtype=np.float64)
        if kernel.ndim != 4 or kernel.shape[2:] != (3, 3):
            raise ValueError(f"{self.name}: kernel must be (out, in, 3, 3), got {kernel.shape}")
        if bias.shape != (kernel.shape[0],):
            raise ValueError(f"{self.name}: bias must have one value per output channel")
        object.__setattr__(self, "kernel", kernel)
        object.__setattr__(self, "bias", bias)

    @property
    def out_channels(self) -> int:
        return self.kernel.shape[0]

    @property
    def in_channels(self) -> int:
        return self.kernel.shape[1]


@dataclass(frozen=True)
class PoolRecord:
    """What pool2x2_backward needs: the mode, input size, and (for max
    pooling) the in-window argmax offsets."""

    mode: str
    input_height: int
    input_width: int
    argmax: Optional[np.ndarray] = None  # (c, h/2, w/2) int8 offsets 0..3


def conv2d_forward(x: Tensor3, layer: ConvLayer) -> Tensor3:
    x = as_tensor3(x)
    require_finite(x, "conv input")
    if x.shape[0] != layer.in_channels:
        raise ValueError(
            f"{layer.name}: input has {x.shape[0]} channels, layer expects {layer.in_channels}")
    return _k.conv3x3_forward(x, layer.kernel, layer.bias)


def conv2d_backward_input(grad_out: Tensor3, layer: ConvLayer) -> Tensor3:
    """Adjoint of conv2d_forward with respect to its input: correlate the
    output gradient with the spatially flipped, in/out-transposed kernel."""
    grad_out = as_tensor3(grad_out)
    require_finite(grad_out, "conv output gradient")
    if grad_out.shape[0] != layer.out_channels:
        raise ValueError(
            f"{layer.name}: gradient has {grad_out.shape[0]} channels, layer emits {layer.out_channels}")
    flipped = np.ascontiguousarray(layer.kernel[:, :, ::-1, ::-1].transpose(1, 0, 2, 3))
    zero_bias = np.zeros(layer.in_channels, dtype=np.float64)
    return _k.conv3x3_forward(grad_out, flipped, zero_bias)


def relu_forward(x: Tensor3) -> Tensor3:
    x = as_tensor3(x)
    require_finite(x, "relu input")
    return np.maximum(x, 0.0)


def relu_backward(grad_out: Tensor3, forward_input: Tensor3) -> Tensor3:
    grad_out = as_tensor3(grad_out)
    forward_input = as_tensor3(forward_input)
    if grad_out.shape != forward_input.shape:
        raise ValueError(f"shape mismatch: grad {grad_out.shape} vs input {forward_input.shape}")
    # subgradient 0 at exactly 0
    return np.where(forward_input > 0.0, grad_out, 0.0)


def pool2x2_forward(x: Tensor3, mode: str = POOL_MAX):
    x = as_tensor3(x)
    require_finite(x, "pool input")
    c, h, w = x.shape
    if h % 2 or w % 2:
        raise ValueError(f"pool2x2 needs even height and width, got {h}x{w}")
    if mode == POOL_MAX:
        out, arg = _k.pool2x2_max_forward(x)
        return out, PoolRecord(POOL_MAX, h, w, arg)
    if mode == POOL_AVERAGE:
        return _k.pool2x2_avg_forward(x), PoolRecord(POOL_AVERAGE, h, w)
    raise ValueError(f"unknown pooling mode {mode!r}")


def pool2x2_backward(grad_out: Tensor3, record: PoolRecord) -> Tensor3:
    grad_out = as_tensor3(grad_out)
    expected = (record.input_height // 2, record.input_width // 2)
    if grad_out.shape[1:] != expected:
        raise ValueError(f"gradient spatial shape {grad_out.shape[1:]} does not match pooled {expected}")
    if record.mode == POOL_MAX:
        if record.argmax is None or record.argmax.shape != grad_out.shape:
            raise ValueError("pool record does not match gradient shape")
        return _k.pool2x2_max_backward(grad_out, record.argmax, record.input_height, record.input_width)
    return _k.pool2x2_avg_backward(grad_out, record.input_height, record.input_width)
