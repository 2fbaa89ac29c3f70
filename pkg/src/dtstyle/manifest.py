"""Flat key = value run manifests.

A manifest is the complete, diff-able record of one generation run: paths,
resolution, mask options, loss weights, layer choices, and optimizer
settings. `#` starts a comment; unknown keys are rejected so typos cannot
silently change an experiment. render/parse round-trip losslessly.
"""

from dataclasses import dataclass, fields, replace
from typing import Optional

from .errors import ManifestError

_TRUE = "true"
_FALSE = "false"


@dataclass(frozen=True)
class RunManifest:
    content: str = ""
    style: str = ""
    weights: str = ""
    out: str = "out"
    resolution: int = 256
    threshold: float = 0.5
    invert: bool = False
    normalize_distance: bool = True
    alpha: float = 0.001
    beta: float = 1.0
    gamma: float = 0.01
    power: int = 2
    content_layer: str = "conv4_2"
    style_layers: tuple[str, ...] = ("conv1_1", "conv2_1", "conv3_1", "conv4_1", "conv5_1")
    iterations: int = 500
    learning_rate: float = 2.0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    snapshot_every: Optional[int] = 50
    seed: int = 0
    channel_order: str = "BGR"
    channel_mean: tuple[float, float, float] = (103.939, 116.779, 123.68)


_FIELD_NAMES = tuple(f.name for f in fields(RunManifest))


def _render_value(value) -> str:
    if isinstance(value, bool):
        return _TRUE if value else _FALSE
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ", ".join(_render_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_manifest(manifest: RunManifest) -> str:
    lines = [f"{name} = {_render_value(getattr(manifest, name))}" for name in _FIELD_NAMES]
    return "\n".join(lines) + "\n"


def _parse_bool(key: str, raw: str) -> bool:
    if raw == _TRUE:
        return True
    if raw == _FALSE:
        return False
    raise ManifestError(f"{key}: expected true or false, got {raw!r}")


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ManifestError(f"{key}: expected an integer, got {raw!r}") from exc


def _parse_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ManifestError(f"{key}: expected a number, got {raw!r}") from exc


def _parse_value(key: str, raw: str):
    if key in ("content", "style", "weights", "out", "content_layer", "channel_order"):
        return raw
    if key in ("invert", "normalize_distance"):
        return _parse_bool(key, raw)
    if key in ("resolution", "power", "iterations", "seed"):
        return _parse_int(key, raw)
    if key in ("threshold", "alpha", "beta", "gamma", "learning_rate",
               "adam_beta1", "adam_beta2", "adam_epsilon"):
        return _parse_float(key, raw)
    if key == "snapshot_every":
        return None if raw == "none" else _parse_int(key, raw)
    if key == "style_layers":
        layers = tuple(part.strip() for part in raw.split(",") if part.strip())
        if not layers:
            raise ManifestError("style_layers: needs at least one layer name")
        return layers
    if key == "channel_mean":
        parts = [part.strip() for part in raw.split(",")]
        if len(parts) != 3:
            raise ManifestError("channel_mean: expected three comma-separated values")
        return tuple(_parse_float(key, part) for part in parts)
    raise ManifestError(f"unknown manifest key {key!r}")


def parse_manifest(text: str, base: Optional[RunManifest] = None) -> RunManifest:
    manifest = base if base is not None else RunManifest()
    updates = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ManifestError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _FIELD_NAMES:
            raise ManifestError(f"line {lineno}: unknown manifest key {key!r}")
        updates[key] = _parse_value(key, raw)
    return replace(manifest, **updates)
