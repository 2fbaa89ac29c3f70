"""Command-line front end.

Subcommands: generate (one run), sweep (grid over gamma / alpha-beta ratio /
emphasis power, with a composite figure), distance-debug (mask and distance
field as PNGs), check-weights (validate a weight file, optionally print the
standard probe response). Flags mirror manifest keys and override them.

Exit codes: 0 success, 2 bad arguments, 3 missing input, 4 weight-file
error, 5 runtime failure. Errors print one machine-parsable line:
``error: <category>: <detail>``.
"""

import argparse
import csv
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np
from PIL import Image as pil_image
from PIL import ImageDraw

from . import __version__
from .distancefield import binarize, edt, emphasize, mask_to_image, render_field
from .errors import DtStyleError, ManifestError, UnreadableFileError, WeightFileError
from .extractor import load_weights, probe_response, spec_for_weights
from .imageio import Image, Preprocess, from_tensor, load_image, resize_bilinear, save_png, to_tensor
from .losses import LossWeights, uniform_style_weights
from .manifest import RunManifest, parse_manifest, render_manifest
from .optimizer import OptimConfig, RunResult, run

EXIT_OK = 0
EXIT_BAD_ARGS = 2
EXIT_MISSING_INPUT = 3
EXIT_WEIGHT_FILE = 4
EXIT_RUNTIME = 5


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgError(message)


def _fail(category: str, detail: str) -> None:
    print(f"error: {category}: {detail}", file=sys.stderr)


def _add_run_flags(sub):
    sub.add_argument("--manifest", help="manifest file; explicit flags override its entries")
    sub.add_argument("--content", help="content image (PNG or JPEG)")
    sub.add_argument("--style", help="style image (PNG or JPEG)")
    sub.add_argument("--weights", help="CNSTW001 weight file")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--resolution", type=int)
    sub.add_argument("--threshold", type=float)
    sub.add_argument("--invert", action=argparse.BooleanOptionalAction, default=None)
    sub.add_argument("--normalize-distance", dest="normalize_distance",
                     action=argparse.BooleanOptionalAction, default=None)
    sub.add_argument("--alpha", type=float)
    sub.add_argument("--beta", type=float)
    sub.add_argument("--gamma", type=float)
    sub.add_argument("--power", type=int)
    sub.add_argument("--content-layer", dest="content_layer")
    sub.add_argument("--style-layers", dest="style_layers",
                     help="comma-separated layer names")
    sub.add_argument("--iterations", type=int)
    sub.add_argument("--lr", dest="learning_rate", type=float)
    sub.add_argument("--snapshot-every", dest="snapshot_every",
                     help="iteration interval, or 'none'")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--channel-order", dest="channel_order", choices=("RGB", "BGR"))
    sub.add_argument("--channel-mean", dest="channel_mean",
                     help="three comma-separated values")


def _build_parser() -> _Parser:
    parser = _Parser(prog="dtstyle",
                     description="Silhouette-constrained neural style transfer")
    parser.add_argument("--version", action="version", version=f"dtstyle {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("generate", help="run one style transfer")
    _add_run_flags(gen)
    gen.set_defaults(func=cmd_generate)

    sweep = subs.add_parser("sweep", help="run a parameter sweep and compose a figure grid")
    _add_run_flags(sweep)
    sweep.add_argument("--axis", required=True, choices=("gamma", "alpha_beta", "power"))
    sweep.add_argument("--values", required=True, help="comma-separated sweep values (at least 2)")
    sweep.add_argument("--jobs", type=int, default=1)
    sweep.set_defaults(func=cmd_sweep)

    dbg = subs.add_parser("distance-debug", help="write the mask and distance field as PNGs")
    dbg.add_argument("--content", required=True)
    dbg.add_argument("--out", required=True)
    dbg.add_argument("--threshold", type=float, default=0.5)
    dbg.add_argument("--invert", action="store_true")
    dbg.add_argument("--power", type=int, default=1)
    dbg.add_argument("--normalize-distance", dest="normalize_distance", action="store_true")
    dbg.set_defaults(func=cmd_distance_debug)

    chk = subs.add_parser("check-weights", help="validate a weight file and list its layers")
    chk.add_argument("--weights", required=True)
    chk.add_argument("--probe-response", action="store_true",
                     help="print the first layer's response to the standard probe as JSON")
    chk.set_defaults(func=cmd_check_weights)
    return parser


def _merge_manifest(args) -> RunManifest:
    manifest = RunManifest()
    if args.manifest is not None:
        path = Path(args.manifest)
        if not path.is_file():
            raise UnreadableFileError(f"manifest not found: {path}")
        manifest = parse_manifest(path.read_text())
    overrides = {}
    for key in ("content", "style", "weights", "out", "resolution", "threshold",
                "invert", "normalize_distance", "alpha", "beta", "gamma", "power",
                "content_layer", "iterations", "learning_rate", "seed", "channel_order"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "style_layers", None) is not None:
        overrides["style_layers"] = tuple(s.strip() for s in args.style_layers.split(",") if s.strip())
    if getattr(args, "snapshot_every", None) is not None:
        raw = args.snapshot_every
        overrides["snapshot_every"] = None if raw == "none" else int(raw)
    if getattr(args, "channel_mean", None) is not None:
        parts = [p.strip() for p in args.channel_mean.split(",")]
        if len(parts) != 3:
            raise ManifestError("channel_mean: expected three comma-separated values")
        overrides["channel_mean"] = tuple(float(p) for p in parts)
    return replace(manifest, **overrides)


def _require_file(path: str, what: str) -> Path:
    if not path:
        raise ManifestError(f"no {what} given")
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"{what} not found: {p}")
    return p


def _prepared_inputs(manifest: RunManifest):
    """Load, resize, binarize, transform: everything run() consumes."""
    content_path = _require_file(manifest.content, "content image")
    style_path = _require_file(manifest.style, "style image")
    weights_path = _require_file(manifest.weights, "weight file")

    weights = load_weights(weights_path)
    spec = spec_for_weights(weights)
    divisor = 2 ** spec.pool_count
    if manifest.resolution < 1 or manifest.resolution % divisor:
        raise ManifestError(
            f"resolution {manifest.resolution} must be a positive multiple of {divisor} "
            f"for this network")
    for layer in (manifest.content_layer, *manifest.style_layers):
        if layer not in spec.conv_names:
            raise ManifestError(f"layer {layer!r} is not in this network")

    size = manifest.resolution
    content_img = resize_bilinear(load_image(content_path), size, size)
    style_img = resize_bilinear(load_image(style_path), size, size)
    mask = binarize(content_img, manifest.threshold, manifest.invert)
    field = emphasize(edt(mask), manifest.power, manifest.normalize_distance)

    prep = Preprocess(manifest.channel_mean, manifest.channel_order)
    content = to_tensor(content_img, prep)
    style = to_tensor(style_img, prep)
    loss_weights = LossWeights(
        alpha=manifest.alpha,
        beta=manifest.beta,
        gamma=manifest.gamma,
        style_layer_weights=uniform_style_weights(manifest.style_layers),
        emphasis_power=manifest.power,
    )
    cfg = OptimConfig(
        iterations=manifest.iterations,
        learning_rate=manifest.learning_rate,
        snapshot_every=manifest.snapshot_every,
        seed=manifest.seed,
    )
    return weights, spec, content, style, field, loss_weights, cfg, prep, weights_path


def _write_outputs(out_dir: Path, manifest: RunManifest, result: RunResult,
                   prep: Preprocess, weights_path: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    final_path = out_dir / "final.png"
    save_png(from_tensor(result.final, prep), final_path)
    for iteration, tensor in result.snapshots:
        save_png(from_tensor(tensor, prep), out_dir / f"snap_{iteration:06}.png")
    with open(out_dir / "loss.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "content", "style", "distance", "total"])
        for i, report in enumerate(result.trace):
            writer.writerow([i, repr(report.content), repr(report.style),
                             repr(report.distance), repr(report.total)])
    sha = hashlib.sha256(weights_path.read_bytes()).hexdigest()
    echo = render_manifest(manifest) + f"# weights_sha256 = {sha}\n"
    (out_dir / "manifest.txt").write_text(echo)
    return final_path


def _run_one(manifest: RunManifest) -> Path:
    weights, spec, content, style, field, loss_weights, cfg, prep, weights_path = \
        _prepared_inputs(manifest)
    result = run(content, style, weights, spec, loss_weights, field, cfg,
                 content_layer=manifest.content_layer)
    result.manifest = {"text": render_manifest(manifest)}
    final_path = _write_outputs(Path(manifest.out), manifest, result, prep, weights_path)
    print(f"wrote {final_path} ({manifest.iterations} iterations, "
          f"total loss {result.trace[0].total:.6g} -> {result.trace[-1].total:.6g})")
    return final_path


def cmd_generate(args) -> int:
    _run_one(_merge_manifest(args))
    return EXIT_OK


def _format_value(value: float) -> str:
    return f"{value:g}"


def _compose_grid(panels: list[tuple[str, Path]], grid_path: Path) -> None:
    """Side-by-side panels with the swept value baked into a label strip."""
    images = [pil_image.open(p).convert("RGB") for _, p in panels]
    label_h = 16
    gap = 4
    width = sum(im.width for im in images) + gap * (len(images) - 1)
    height = max(im.height for im in images) + label_h
    canvas = pil_image.new("RGB", (width, height), (255, 255, 255))
    draw = ImageDraw.Draw(canvas)
    x = 0
    for (label, _), im in zip(panels, images):
        canvas.paste(im, (x, label_h))
        draw.text((x + 2, 2), label, fill=(0, 0, 0))
        x += im.width + gap
    canvas.save(grid_path, format="PNG")


def cmd_sweep(args) -> int:
    base = _merge_manifest(args)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise ManifestError(f"bad sweep value: {exc}") from exc
    if len(values) < 2:
        raise ManifestError("a sweep needs at least 2 values")
    out_root = Path(base.out)

    variants: list[tuple[str, RunManifest]] = []
    for value in values:
        if args.axis == "gamma":
            derived = replace(base, gamma=value)
            label = f"gamma={_format_value(value)}"
        elif args.axis == "alpha_beta":
            derived = replace(base, alpha=value * base.beta)
            label = f"alpha/beta={_format_value(value)}"
        else:
            if value != int(value) or value < 1:
                raise ManifestError(f"power values must be integers >= 1, got {value:g}")
            derived = replace(base, power=int(value))
            label = f"power={_format_value(value)}"
        subdir = out_root / f"{args.axis}_{_format_value(value)}"
        variants.append((label, replace(derived, out=str(subdir))))

    jobs = max(1, args.jobs)
    if jobs == 1:
        finals = [_run_one(m) for _, m in variants]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            finals = list(pool.map(_run_one, [m for _, m in variants]))
    panels = [(label, final) for (label, _), final in zip(variants, finals)]
    grid_path = out_root / "grid.png"
    _compose_grid(panels, grid_path)
    print(f"wrote {grid_path}")
    return EXIT_OK


def cmd_distance_debug(args) -> int:
    content_path = _require_file(args.content, "content image")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    img = load_image(content_path)
    mask = binarize(img, args.threshold, args.invert)
    field = emphasize(edt(mask), args.power, args.normalize_distance)
    save_png(mask_to_image(mask), out_dir / "mask.png")
    save_png(render_field(field), out_dir / "distance.png")
    print(f"wrote {out_dir / 'mask.png'} and {out_dir / 'distance.png'}")
    return EXIT_OK


def cmd_check_weights(args) -> int:
    weights_path = _require_file(args.weights, "weight file")
    weights = load_weights(weights_path)
    total = 0
    for name, layer in weights.layers.items():
        params = layer.kernel.size + layer.bias.size
        total += params
        print(f"{name}: {layer.out_channels}x{layer.in_channels}x3x3 (+{layer.out_channels} bias)")
    print(f"{len(weights.layers)} layers, {total} parameters")
    if args.probe_response:
        name, response = probe_response(weights)
        print(json.dumps({
            "layer": name,
            "shape": list(response.shape),
            "values": [float(v) for v in response.ravel()],
        }))
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _ArgError as exc:
        _fail("bad-arguments", str(exc))
        return EXIT_BAD_ARGS
    try:
        return args.func(args)
    except ManifestError as exc:
        _fail("bad-arguments", str(exc))
        return EXIT_BAD_ARGS
    except (FileNotFoundError, UnreadableFileError) as exc:
        _fail("input-missing", str(exc))
        return EXIT_MISSING_INPUT
    except WeightFileError as exc:
        _fail("weight-file", str(exc))
        return EXIT_WEIGHT_FILE
    except (DtStyleError, ValueError, RuntimeError, OSError) as exc:
        _fail("runtime", str(exc))
        return EXIT_RUNTIME


def entrypoint() -> None:
    sys.exit(main())
