"""Content, style, and distance-transform losses with exact gradients.

Content loss is half the squared feature difference at one layer. Style
loss compares Gram matrices (channel-by-channel inner products of the
flattened feature maps) across a set of layers, each term scaled by
1 / (4 N^2 M^2) for N channels and M spatial elements. The distance loss
is half the squared difference of the distance-weighted content and
generated images, so far-from-silhouette pixels are pinned to the content
while silhouette pixels stay free.
"""

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .distancefield import DistanceField
from .numerics import Tensor3, as_tensor3


@dataclass(frozen=True)
class GramSet:
    """Gram matrix per layer plus the (N, M) sizes the scaling needs."""

    grams: dict[str, np.ndarray]
    dims: dict[str, tuple[int, int]]


@dataclass(frozen=True)
class LossWeights:
    """alpha/beta/gamma for content/style/distance, per-layer style weights,
    and the emphasis power the distance field is expected to carry."""

    alpha: float
    beta: float
    gamma: float
    style_layer_weights: dict[str, float]
    emphasis_power: int = 1

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or self.gamma < 0:
            raise ValueError("loss weights must be non-negative")
        if self.alpha == 0 and self.beta == 0 and self.gamma == 0:
            raise ValueError("at least one of alpha, beta, gamma must be positive")
        if any(w < 0 for w in self.style_layer_weights.values()):
            raise ValueError("style layer weights must be non-negative")


@dataclass(frozen=True)
class LossReport:
    content: float
    style: float
    per_layer_E: dict[str, float]
    distance: float
    total: float


@dataclass(frozen=True)
class StyleLoss:
    value: float
    grad_by_layer: dict[str, np.ndarray]
    energy_by_layer: dict[str, float]


def uniform_style_weights(layers) -> dict[str, float]:
    layers = tuple(layers)
    return {name: 1.0 / len(layers) for name in layers}


def gram(feature: np.ndarray) -> np.ndarray:
    """G = F F^T with F viewed as (channels, spatial elements). The lower
    triangle is mirrored up so the result is bitwise symmetric."""
    f = np.asarray(feature, dtype=np.float64)
    flat = f.reshape(f.shape[0], -1)
    g = flat @ flat.T
    return np.tril(g) + np.tril(g, -1).T


def gram_set(features: Mapping[str, np.ndarray]) -> GramSet:
    grams: dict[str, np.ndarray] = {}
    dims: dict[str, tuple[int, int]] = {}
    for name, fmap in features.items():
        fmap = np.asarray(fmap)
        n = fmap.shape[0]
        m = fmap.size // n
        grams[name] = gram(fmap)
        dims[name] = (n, m)
    return GramSet(grams, dims)


def content_loss(f: Tensor3, p: Tensor3):
    """Returns (0.5 * sum((F - P)^2), F - P)."""
    f = np.asarray(f, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if f.shape != p.shape:
        raise ValueError(f"feature shapes differ: {f.shape} vs {p.shape}")
    diff = f - p
    return 0.5 * float((diff * diff).sum()), diff


def style_loss(grams_x: GramSet, grams_a: GramSet, layer_weights: Mapping[str, float]) -> StyleLoss:
    if set(grams_x.grams) != set(grams_a.grams):
        raise ValueError("style gram sets cover different layers")
    if set(layer_weights) != set(grams_x.grams):
        raise ValueError("style layer weights do not match the gram layers")
    value = 0.0
    grads: dict[str, np.ndarray] = {}
    energies: dict[str, float] = {}
    for name, gx in grams_x.grams.items():
        ga = grams_a.grams[name]
        n, m = grams_x.dims[name]
        if grams_a.dims[name] != (n, m) or gx.shape != ga.shape:
            raise ValueError(f"{name}: gram dimensions differ between the two sets")
        diff = gx - ga
        energy = float((diff * diff).sum()) / (4.0 * n * n * m * m)
        w = layer_weights[name]
        value += w * energy
        grads[name] = (w / (2.0 * n * n * m * m)) * diff
        energies[name] = energy
    return StyleLoss(value, grads, energies)


def style_grad_to_features(grad_g: np.ndarray, feature: np.ndarray) -> np.ndarray:
    """Chain a Gram-matrix gradient back to the feature map:
    dL/dF = (G' + G'^T) F, i.e. 2 G' F for the symmetric G' style_loss
    produces."""
    feature = np.asarray(feature, dtype=np.float64)
    n = feature.shape[0]
    grad_g = np.asarray(grad_g, dtype=np.float64)
    if grad_g.shape != (n, n):
        raise ValueError(f"gram gradient is {grad_g.shape}, feature has {n} channels")
    flat = feature.reshape(n, -1)
    return ((grad_g + grad_g.T) @ flat).reshape(feature.shape)


def distance_loss(p: Tensor3, x: Tensor3, field: DistanceField):
    """Returns (value, grad_x) for 0.5 * sum((D * (p - x))^2) with the
    field broadcast over channels. Silhouette pixels (D = 0) contribute
    nothing regardless of x."""
    p = as_tensor3(p)
    x = as_tensor3(x)
    if p.shape != x.shape:
        raise ValueError(f"tensor shapes differ: {p.shape} vs {x.shape}")
    if field.values.shape != p.shape[1:]:
        raise ValueError(f"field is {field.values.shape}, tensors are {p.shape[1:]}")
    weights = field.values[None, :, :]
    diff = p - x
    weighted = weights * diff
    value = 0.5 * float((weighted * weighted).sum())
    grad_x = -(weights * weights) * diff
    return value, grad_x


def total_loss(content: float, style: float, distance: float, w: LossWeights) -> float:
    if content < 0 or style < 0 or distance < 0:
        raise ValueError("loss components must be non-negative")
    return w.alpha * content + w.beta * style + w.gamma * distance
