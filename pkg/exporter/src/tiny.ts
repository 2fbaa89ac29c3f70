/** The tiny deterministic test network: 3->4 conv, ReLU, 4->4 conv, ReLU.
 * Weights are float32 uniform in [-0.1, 0.1) from a seeded stream, so the
 * same seed always yields a byte-identical file. */

import type { ConvLayer } from "./cnstw.js";
import { mulberry32, uniformF32 } from "./rng.js";

const LIMIT = 0.1;

export function makeTinyNetwork(seed: number): ConvLayer[] {
  const next = mulberry32(seed);
  const layer = (name: string, outCh: number, inCh: number): ConvLayer => ({
    name,
    outChannels: outCh,
    inChannels: inCh,
    kernelH: 3,
    kernelW: 3,
    kernel: uniformF32(next, outCh * inCh * 9, LIMIT),
    bias: uniformF32(next, outCh, LIMIT),
  });
  return [layer("conv1_1", 4, 3), layer("conv1_2", 4, 4)];
}
