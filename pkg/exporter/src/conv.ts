/** Just enough forward math to compute probe responses: 3x3 correlation
 * with stride 1 and zero padding 1, then ReLU. Float64 accumulation. */

import type { ConvLayer } from "./cnstw.js";

export const PROBE_CHANNELS = 3;
export const PROBE_SIZE = 8;

/** Fixed probe pattern shared with the consumer:
 * value(c, y, x) = ((64c + 8y + x) mod 23 - 11) / 11. */
export function probeInput(): Float64Array {
  const n = PROBE_CHANNELS * PROBE_SIZE * PROBE_SIZE;
  const out = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    out[i] = ((i % 23) - 11) / 11;
  }
  return out;
}

export function convReluForward(
  input: Float64Array,
  channels: number,
  height: number,
  width: number,
  layer: ConvLayer,
): Float64Array {
  if (layer.inChannels !== channels) {
    throw new Error(`${layer.name}: expects ${layer.inChannels} input channels, got ${channels}`);
  }
  if (layer.kernelH !== 3 || layer.kernelW !== 3) {
    throw new Error(`${layer.name}: probe math only handles 3x3 kernels`);
  }
  const out = new Float64Array(layer.outChannels * height * width);
  for (let o = 0; o < layer.outChannels; o++) {
    for (let y = 0; y < height; y++) {
      for (let x = 0; x < width; x++) {
        let acc = layer.bias[o];
        for (let c = 0; c < channels; c++) {
          for (let dy = 0; dy < 3; dy++) {
            const iy = y + dy - 1;
            if (iy < 0 || iy >= height) continue;
            for (let dx = 0; dx < 3; dx++) {
              const ix = x + dx - 1;
              if (ix < 0 || ix >= width) continue;
              acc +=
                input[(c * height + iy) * width + ix] *
                layer.kernel[((o * channels + c) * 3 + dy) * 3 + dx];
            }
          }
        }
        out[(o * height + y) * width + x] = Math.max(acc, 0);
      }
    }
  }
  return out;
}

export interface ProbeSidecar {
  layer: string;
  probe: { shape: number[]; formula: string };
  shape: number[];
  values: number[];
}

/** Post-ReLU response of the first layer to the standard probe. */
export function probeSidecar(layers: ConvLayer[]): ProbeSidecar {
  const first = layers[0];
  const response = convReluForward(probeInput(), PROBE_CHANNELS, PROBE_SIZE, PROBE_SIZE, first);
  return {
    layer: first.name,
    probe: {
      shape: [PROBE_CHANNELS, PROBE_SIZE, PROBE_SIZE],
      formula: "((64c + 8y + x) mod 23 - 11) / 11",
    },
    shape: [first.outChannels, PROBE_SIZE, PROBE_SIZE],
    values: Array.from(response),
  };
}
