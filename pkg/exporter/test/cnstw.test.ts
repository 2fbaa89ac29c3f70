import { describe, expect, it } from "vitest";

import { crc32 } from "../src/crc32.js";
import { readCnstw, writeCnstw } from "../src/cnstw.js";
import { makeTinyNetwork } from "../src/tiny.js";
import { mulberry32 } from "../src/rng.js";

describe("crc32", () => {
  it("matches the zlib reference values", () => {
    // zlib.crc32(b"") == 0, zlib.crc32(b"123456789") == 0xCBF43926
    expect(crc32(new Uint8Array(0))).toBe(0);
    expect(crc32(new TextEncoder().encode("123456789"))).toBe(0xcbf43926);
  });
});

describe("mulberry32", () => {
  it("is deterministic and uniform-ish", () => {
    const a = mulberry32(7);
    const b = mulberry32(7);
    const seqA = Array.from({ length: 100 }, a);
    const seqB = Array.from({ length: 100 }, b);
    expect(seqA).toEqual(seqB);
    expect(Math.min(...seqA)).toBeGreaterThanOrEqual(0);
    expect(Math.max(...seqA)).toBeLessThan(1);
    expect(new Set(seqA).size).toBeGreaterThan(90);
  });
});

describe("tiny network", () => {
  it("has the documented architecture", () => {
    const layers = makeTinyNetwork(1);
    expect(layers.map((l) => l.name)).toEqual(["conv1_1", "conv1_2"]);
    expect(layers[0].inChannels).toBe(3);
    expect(layers[0].outChannels).toBe(4);
    expect(layers[1].inChannels).toBe(4);
    expect(layers[1].outChannels).toBe(4);
    for (const layer of layers) {
      for (const v of layer.kernel) {
        expect(Math.abs(v)).toBeLessThanOrEqual(0.1);
        expect(v).toBe(Math.fround(v)); // genuinely float32
      }
    }
  });

  it("same seed gives byte-identical files, different seeds differ", () => {
    const a = writeCnstw(makeTinyNetwork(42));
    const b = writeCnstw(makeTinyNetwork(42));
    const c = writeCnstw(makeTinyNetwork(43));
    expect(a.equals(b)).toBe(true);
    expect(a.equals(c)).toBe(false);
  });
});

describe("cnstw container", () => {
  it("round-trips through write and read", () => {
    const layers = makeTinyNetwork(5);
    const parsed = readCnstw(writeCnstw(layers));
    expect(parsed.length).toBe(2);
    parsed.forEach((layer, i) => {
      expect(layer.name).toBe(layers[i].name);
      expect(Array.from(layer.kernel)).toEqual(Array.from(layers[i].kernel));
      expect(Array.from(layer.bias)).toEqual(Array.from(layers[i].bias));
    });
  });

  it("rejects a flipped payload byte", () => {
    const data = writeCnstw(makeTinyNetwork(5));
    data[Math.floor(data.length / 2)] ^= 1;
    expect(() => readCnstw(data)).toThrow(/CRC-32/);
  });

  it("rejects bad magic", () => {
    const data = writeCnstw(makeTinyNetwork(5));
    data[0] ^= 0xff;
    expect(() => readCnstw(data)).toThrow(/not a CNSTW001/);
  });
});
