/** CNSTW001 container: write and read.
 *
 * Layout (little-endian): magic "CNSTW001"; u32 layer count; per layer a
 * u16 name length, UTF-8 name, u32 out/in/kernel_h/kernel_w, float32 kernel
 * in out-major row-major order, float32 bias; trailing CRC-32 of all
 * preceding bytes.
 */

import { crc32 } from "./crc32.js";

export interface ConvLayer {
  name: string;
  outChannels: number;
  inChannels: number;
  kernelH: number;
  kernelW: number;
  /** out*in*kh*kw values, out-major row-major */
  kernel: Float32Array;
  bias: Float32Array;
}

export function writeCnstw(layers: ConvLayer[]): Buffer {
  const chunks: Buffer[] = [Buffer.from("CNSTW001", "ascii")];
  const count = Buffer.alloc(4);
  count.writeUInt32LE(layers.length);
  chunks.push(count);
  for (const layer of layers) {
    const name = Buffer.from(layer.name, "utf-8");
    const head = Buffer.alloc(2 + 16);
    head.writeUInt16LE(name.length, 0);
    head.writeUInt32LE(layer.outChannels, 2);
    head.writeUInt32LE(layer.inChannels, 6);
    head.writeUInt32LE(layer.kernelH, 10);
    head.writeUInt32LE(layer.kernelW, 14);
    const expected = layer.outChannels * layer.inChannels * layer.kernelH * layer.kernelW;
    if (layer.kernel.length !== expected) {
      throw new Error(`${layer.name}: kernel has ${layer.kernel.length} values, expected ${expected}`);
    }
    if (layer.bias.length !== layer.outChannels) {
      throw new Error(`${layer.name}: bias has ${layer.bias.length} values, expected ${layer.outChannels}`);
    }
    const kernel = Buffer.alloc(layer.kernel.length * 4);
    layer.kernel.forEach((v, i) => kernel.writeFloatLE(v, i * 4));
    const bias = Buffer.alloc(layer.bias.length * 4);
    layer.bias.forEach((v, i) => bias.writeFloatLE(v, i * 4));
    chunks.push(Buffer.concat([head.subarray(0, 2), name, head.subarray(2)]), kernel, bias);
  }
  const body = Buffer.concat(chunks);
  const trailer = Buffer.alloc(4);
  trailer.writeUInt32LE(crc32(body));
  return Buffer.concat([body, trailer]);
}

export function readCnstw(data: Buffer): ConvLayer[] {
  if (data.length < 8 || data.subarray(0, 8).toString("ascii") !== "CNSTW001") {
    throw new Error("not a CNSTW001 file");
  }
  const body = data.subarray(0, data.length - 4);
  const stored = data.readUInt32LE(data.length - 4);
  if (crc32(body) !== stored) {
    throw new Error("CRC-32 mismatch");
  }
  let offset = 8;
  const need = (n: number, what: string) => {
    if (offset + n > body.length) throw new Error(`file ends inside ${what}`);
  };
  need(4, "layer count");
  const count = body.readUInt32LE(offset);
  offset += 4;
  const layers: ConvLayer[] = [];
  for (let i = 0; i < count; i++) {
    need(2, "name length");
    const nameLen = body.readUInt16LE(offset);
    offset += 2;
    need(nameLen + 16, "layer header");
    const name = body.subarray(offset, offset + nameLen).toString("utf-8");
    offset += nameLen;
    const outChannels = body.readUInt32LE(offset);
    const inChannels = body.readUInt32LE(offset + 4);
    const kernelH = body.readUInt32LE(offset + 8);
    const kernelW = body.readUInt32LE(offset + 12);
    offset += 16;
    const kCount = outChannels * inChannels * kernelH * kernelW;
    need(kCount * 4 + outChannels * 4, `${name} payload`);
    const kernel = new Float32Array(kCount);
    for (let k = 0; k < kCount; k++) kernel[k] = body.readFloatLE(offset + k * 4);
    offset += kCount * 4;
    const bias = new Float32Array(outChannels);
    for (let b = 0; b < outChannels; b++) bias[b] = body.readFloatLE(offset + b * 4);
    offset += outChannels * 4;
    layers.push({ name, outChannels, inChannels, kernelH, kernelW, kernel, bias });
  }
  if (offset !== body.length) throw new Error("unexpected trailing bytes");
  return layers;
}
