"""Iterative minimization of the combined loss over the generated image.

The generated image starts as an exact copy of the content tensor, so the
content and distance losses are exactly zero at iteration 0 and only the
style term drives the first steps. Each iteration runs one forward pass,
assembles the pixel gradient (content + style through the network, the
distance term directly in pixel space), and takes one bias-corrected
adaptive step. Everything is deterministic: identical inputs give
bit-identical trajectories.
"""

import os
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .distancefield import DistanceField
from .extractor import NetworkSpec, NetworkWeights, backward_to_input, detach, forward, load_weights
from .losses import (
    LossReport,
    LossWeights,
    content_loss,
    distance_loss,
    gram_set,
    style_grad_to_features,
    style_loss,
    total_loss,
)
from .numerics import Tensor3, as_tensor3


@dataclass(frozen=True)
class OptimConfig:
    iterations: int = 500
    learning_rate: float = 2.0  # in preprocessed-pixel units
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    snapshot_every: Optional[int] = 50
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not (0.0 < self.adam_beta1 < 1.0 and 0.0 < self.adam_beta2 < 1.0):
            raise ValueError("adam betas must lie in (0, 1)")
        if self.learning_rate <= 0.0 or self.adam_epsilon <= 0.0:
            raise ValueError("learning rate and epsilon must be positive")
        if self.snapshot_every is not None and self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1 or none")


@dataclass
class OptimState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros_like(cls, x: Tensor3) -> "OptimState":
        return cls(np.zeros_like(x), np.zeros_like(x))


@dataclass
class RunResult:
    final: Tensor3
    trace: list[LossReport]
    snapshots: list[tuple[int, Tensor3]]
    manifest: Optional[dict] = dc_field(default=None)


def init_generated(p: Tensor3) -> Tensor3:
    """The optimization variable starts as an exact copy of the content."""
    return as_tensor3(p).copy()


def adam_step(x: Tensor3, grad: Tensor3, state: OptimState, cfg: OptimConfig) -> Tensor3:
    """One bias-corrected adaptive step; mutates the moment accumulators."""
    x = as_tensor3(x)
    grad = as_tensor3(grad)
    if grad.shape != x.shape or state.m.shape != x.shape:
        raise ValueError("gradient/state shapes do not match the variable")
    state.step += 1
    b1, b2 = cfg.adam_beta1, cfg.adam_beta2
    state.m *= b1
    state.m += (1.0 - b1) * grad
    state.v *= b2
    state.v += (1.0 - b2) * (grad * grad)
    m_hat = state.m / (1.0 - b1 ** state.step)
    v_hat = state.v / (1.0 - b2 ** state.step)
    return x - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.adam_epsilon)


def run(content: Tensor3, style: Tensor3, weights, spec: NetworkSpec,
        loss_weights: LossWeights, field: Optional[DistanceField], cfg: OptimConfig,
        content_layer: str = "conv4_2") -> RunResult:
    """Full pipeline: store the content representation and the style Gram
    matrices, then iterate forward / gradient / step from the content
    initialization. `weights` may be a NetworkWeights or a weight-file
    path."""
    if isinstance(weights, (str, os.PathLike)):
        weights = load_weights(weights)
    if not isinstance(weights, NetworkWeights):
        raise TypeError("weights must be a NetworkWeights or a path to a weight file")
    p = as_tensor3(content)
    a = as_tensor3(style)
    if p.shape != a.shape:
        raise ValueError(f"content {p.shape} and style {a.shape} must share the run resolution")
    style_layers = tuple(loss_weights.style_layer_weights)
    if field is not None:
        if field.values.shape != p.shape[1:]:
            raise ValueError(f"distance field {field.values.shape} does not match images {p.shape[1:]}")
        if field.emphasis_power != loss_weights.emphasis_power:
            raise ValueError(
                f"field carries emphasis power {field.emphasis_power}, "
                f"loss weights expect {loss_weights.emphasis_power}")
    elif loss_weights.gamma != 0.0:
        raise ValueError("gamma > 0 requires a distance field")

    p_bundle = detach(forward(p, weights, spec, {content_layer}))
    p_feature = p_bundle[content_layer]
    a_bundle = detach(forward(a, weights, spec, style_layers))
    a_grams = gram_set(a_bundle.features)

    x = init_generated(p)
    state = OptimState.zeros_like(x)
    request = {content_layer, *style_layers}
    reports: list[LossReport] = []
    snapshots: list[tuple[int, Tensor3]] = []

    for it in range(1, cfg.iterations + 1):
        try:
            trace = forward(x, weights, spec, request)
            c_value, c_grad = content_loss(trace.features[content_layer], p_feature)
            x_grams = gram_set({name: trace.features[name] for name in style_layers})
            s = style_loss(x_grams, a_grams, loss_weights.style_layer_weights)

            layer_grads: dict[str, np.ndarray] = {content_layer: loss_weights.alpha * c_grad}
            for name in style_layers:
                g = loss_weights.beta * style_grad_to_features(s.grad_by_layer[name], trace.features[name])
                if name in layer_grads:
                    layer_grads[name] = layer_grads[name] + g
                else:
                    layer_grads[name] = g
            pixel_grad = backward_to_input(trace, layer_grads)

            if field is not None:
                d_value, d_grad = distance_loss(p, x, field)
                pixel_grad = pixel_grad + loss_weights.gamma * d_grad
            else:
                d_value = 0.0

            reports.append(LossReport(
                content=c_value,
                style=s.value,
                per_layer_E=s.energy_by_layer,
                distance=d_value,
                total=total_loss(c_value, s.value, d_value, loss_weights),
            ))
            x = adam_step(x, pixel_grad, state, cfg)
        except Exception as exc:
            raise RuntimeError(f"optimization failed at iteration {it}: {exc}") from exc
        if cfg.snapshot_every is not None and it % cfg.snapshot_every == 0:
            snapshots.append((it, x.copy()))
    return RunResult(final=x, trace=reports, snapshots=snapshots)
