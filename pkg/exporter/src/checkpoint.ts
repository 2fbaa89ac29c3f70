/** Load a publicly distributed VGG-19 checkpoint and place every conv layer
 * in the canonical out-in-kh-kw layout, whatever the source stored.
 *
 * Two source forms are understood:
 *  - a tfjs model directory or model.json (weightsManifest + binary shards,
 *    layer names like "block1_conv1/kernel" with kh,kw,in,out tensors), and
 *  - a directory of .npy files named conv<b>_<j>.kernel.npy /
 *    conv<b>_<j>.bias.npy (kernel layout autodetected).
 */

import * as fs from "node:fs";
import * as path from "node:path";

import type { ConvLayer } from "./cnstw.js";

export class UnreachableSourceError extends Error {}
export class CheckpointStructureError extends Error {}

/** conv1_1 .. conv5_4 in network order. */
export const VGG19_CONV_NAMES: readonly string[] = (() => {
  const counts = [2, 2, 4, 4, 4];
  const names: string[] = [];
  counts.forEach((count, blockIdx) => {
    for (let j = 1; j <= count; j++) names.push(`conv${blockIdx + 1}_${j}`);
  });
  return names;
})();

export function truncatedNames(truncateAfter: string): string[] {
  const idx = VGG19_CONV_NAMES.indexOf(truncateAfter);
  if (idx < 0) {
    throw new CheckpointStructureError(`${truncateAfter} is not a canonical conv layer name`);
  }
  return VGG19_CONV_NAMES.slice(0, idx + 1);
}

interface RawTensor {
  shape: number[];
  data: Float32Array;
}

/** kh,kw,in,out (TF) -> out,in,kh,kw; already-canonical tensors pass through.
 * The 3x3 spatial dims disambiguate the layout (canonical wins the one
 * degenerate 3,3,3,3 case, where both readings coincide anyway). */
function toCanonicalKernel(name: string, raw: RawTensor): { kernel: Float32Array; outCh: number; inCh: number; kh: number; kw: number } {
  const s = raw.shape;
  if (s.length !== 4) {
    throw new CheckpointStructureError(`${name}: kernel must be rank 4, got shape [${s}]`);
  }
  if (s[2] === 3 && s[3] === 3) {
    const [outCh, inCh, kh, kw] = s;
    return { kernel: Float32Array.from(raw.data), outCh, inCh, kh, kw };
  }
  if (s[0] === 3 && s[1] === 3) {
    const [kh, kw, inCh, outCh] = s;
    const kernel = new Float32Array(outCh * inCh * kh * kw);
    for (let o = 0; o < outCh; o++)
      for (let c = 0; c < inCh; c++)
        for (let y = 0; y < kh; y++)
          for (let x = 0; x < kw; x++)
            kernel[((o * inCh + c) * kh + y) * kw + x] = raw.data[((y * kw + x) * inCh + c) * outCh + o];
    return { kernel, outCh, inCh, kh, kw };
  }
  throw new CheckpointStructureError(`${name}: kernel shape [${s}] matches neither kh,kw,in,out nor out,in,kh,kw`);
}

function assemble(name: string, kernelRaw: RawTensor, biasRaw: RawTensor): ConvLayer {
  const { kernel, outCh, inCh, kh, kw } = toCanonicalKernel(name, kernelRaw);
  if (biasRaw.shape.length !== 1 || biasRaw.shape[0] !== outCh) {
    throw new CheckpointStructureError(`${name}: bias shape [${biasRaw.shape}] does not match ${outCh} output channels`);
  }
  return {
    name,
    outChannels: outCh,
    inChannels: inCh,
    kernelH: kh,
    kernelW: kw,
    kernel,
    bias: Float32Array.from(biasRaw.data),
  };
}

// --- .npy reading ------------------------------------------------------

function readNpy(file: string): RawTensor {
  const buf = fs.readFileSync(file);
  if (buf.length < 10 || buf.subarray(1, 6).toString("ascii") !== "NUMPY") {
    throw new CheckpointStructureError(`${file}: not an .npy file`);
  }
  const major = buf[6];
  const headerLen = major >= 2 ? buf.readUInt32LE(8) : buf.readUInt16LE(8);
  const headerStart = major >= 2 ? 12 : 10;
  const header = buf.subarray(headerStart, headerStart + headerLen).toString("latin1");
  const descr = /'descr':\s*'([^']+)'/.exec(header)?.[1];
  const fortran = /'fortran_order':\s*(True|False)/.exec(header)?.[1];
  const shapeText = /'shape':\s*\(([^)]*)\)/.exec(header)?.[1];
  if (!descr || !fortran || shapeText === undefined) {
    throw new CheckpointStructureError(`${file}: malformed .npy header`);
  }
  if (descr !== "<f4") {
    throw new CheckpointStructureError(`${file}: dtype ${descr} unsupported, expected <f4`);
  }
  if (fortran === "True") {
    throw new CheckpointStructureError(`${file}: fortran-order arrays are unsupported`);
  }
  const shape = shapeText.split(",").map((p) => p.trim()).filter((p) => p.length).map(Number);
  const count = shape.reduce((a, b) => a * b, 1);
  const dataStart = headerStart + headerLen;
  if (buf.length < dataStart + count * 4) {
    throw new CheckpointStructureError(`${file}: data shorter than its declared shape`);
  }
  const data = new Float32Array(count);
  for (let i = 0; i < count; i++) data[i] = buf.readFloatLE(dataStart + i * 4);
  return { shape, data };
}

function loadNpyDir(dir: string, names: string[]): ConvLayer[] {
  return names.map((name) => {
    const kernelPath = path.join(dir, `${name}.kernel.npy`);
    const biasPath = path.join(dir, `${name}.bias.npy`);
    if (!fs.existsSync(kernelPath) || !fs.existsSync(biasPath)) {
      throw new CheckpointStructureError(`${dir}: missing ${name}.kernel.npy / ${name}.bias.npy`);
    }
    return assemble(name, readNpy(kernelPath), readNpy(biasPath));
  });
}

// --- tfjs model.json reading -------------------------------------------

interface TfjsWeightEntry {
  name: string;
  shape: number[];
  dtype: string;
}

function tfjsName(canonical: string, kind: "kernel" | "bias"): string {
  const m = /^conv(\d+)_(\d+)$/.exec(canonical)!;
  return `block${m[1]}_conv${m[2]}/${kind}`;
}

function loadTfjs(modelJsonPath: string, names: string[]): ConvLayer[] {
  const dir = path.dirname(modelJsonPath);
  let model: { weightsManifest?: { paths: string[]; weights: TfjsWeightEntry[] }[] };
  try {
    model = JSON.parse(fs.readFileSync(modelJsonPath, "utf-8"));
  } catch (err) {
    throw new CheckpointStructureError(`${modelJsonPath}: not valid JSON (${err})`);
  }
  if (!Array.isArray(model.weightsManifest)) {
    throw new CheckpointStructureError(`${modelJsonPath}: no weightsManifest`);
  }
  const tensors = new Map<string, RawTensor>();
  for (const group of model.weightsManifest) {
    const blob = Buffer.concat(group.paths.map((p) => fs.readFileSync(path.join(dir, p))));
    let offset = 0;
    for (const entry of group.weights) {
      const count = entry.shape.reduce((a, b) => a * b, 1);
      if (entry.dtype !== "float32") {
        throw new CheckpointStructureError(`${entry.name}: dtype ${entry.dtype} unsupported`);
      }
      if (offset + count * 4 > blob.length) {
        throw new CheckpointStructureError(`${entry.name}: shard data exhausted`);
      }
      const data = new Float32Array(count);
      for (let i = 0; i < count; i++) data[i] = blob.readFloatLE(offset + i * 4);
      offset += count * 4;
      tensors.set(entry.name, { shape: entry.shape, data });
    }
  }
  return names.map((name) => {
    const kernel = tensors.get(tfjsName(name, "kernel"));
    const bias = tensors.get(tfjsName(name, "bias"));
    if (!kernel || !bias) {
      throw new CheckpointStructureError(`checkpoint has no ${tfjsName(name, "kernel")}`);
    }
    return assemble(name, kernel, bias);
  });
}

// --- entry point --------------------------------------------------------

export function loadVgg19(checkpoint: string | undefined, truncateAfter: string): ConvLayer[] {
  const names = truncatedNames(truncateAfter);
  if (!checkpoint) {
    throw new UnreachableSourceError(
      "no checkpoint given and this tool does not download; pass --checkpoint <model.json or npy dir>");
  }
  if (!fs.existsSync(checkpoint)) {
    throw new UnreachableSourceError(`checkpoint path does not exist: ${checkpoint}`);
  }
  const stat = fs.statSync(checkpoint);
  if (stat.isDirectory()) {
    const modelJson = path.join(checkpoint, "model.json");
    if (fs.existsSync(modelJson)) return loadTfjs(modelJson, names);
    return loadNpyDir(checkpoint, names);
  }
  if (checkpoint.endsWith(".json")) return loadTfjs(checkpoint, names);
  throw new CheckpointStructureError(`cannot tell what kind of checkpoint ${checkpoint} is`);
}
