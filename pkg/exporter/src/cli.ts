#!/usr/bin/env node
/** CNSTW exporter command line.
 *
 * Usage:
 *   cnstw-export export --source tiny --seed N --out FILE
 *   cnstw-export export --source vgg19 --checkpoint PATH [--truncate conv5_1] --out FILE
 *   cnstw-export probe --weights FILE --out FILE
 *
 * `export` writes the weight file plus a `<out>.probe.json` sidecar holding
 * the source's first-layer response to the standard probe input; `probe`
 * recomputes that sidecar from an existing weight file.
 */

import * as crypto from "node:crypto";
import * as fs from "node:fs";
import * as path from "node:path";

import { CheckpointStructureError, UnreachableSourceError, loadVgg19 } from "./checkpoint.js";
import { readCnstw, writeCnstw, type ConvLayer } from "./cnstw.js";
import { probeSidecar } from "./conv.js";
import { makeTinyNetwork } from "./tiny.js";

interface Args {
  command?: string;
  source?: string;
  seed?: number;
  out?: string;
  checkpoint?: string;
  truncate?: string;
  weights?: string;
  help?: boolean;
}

function parseArgs(argv: string[]): Args {
  const args: Args = {};
  const positional: string[] = [];
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    switch (arg) {
      case "--source":
        args.source = argv[++i];
        break;
      case "--seed":
        args.seed = Number(argv[++i]);
        break;
      case "--out":
        args.out = argv[++i];
        break;
      case "--checkpoint":
        args.checkpoint = argv[++i];
        break;
      case "--truncate":
        args.truncate = argv[++i];
        break;
      case "--weights":
        args.weights = argv[++i];
        break;
      case "--help":
      case "-h":
        args.help = true;
        break;
      default:
        if (arg.startsWith("-")) throw new Error(`unknown flag ${arg}`);
        positional.push(arg);
    }
  }
  args.command = positional[0];
  if (positional.length > 1) throw new Error(`unexpected argument ${positional[1]}`);
  return args;
}

const USAGE = `usage:
  cnstw-export export --source tiny --seed N --out FILE
  cnstw-export export --source vgg19 --checkpoint PATH [--truncate conv5_1] --out FILE
  cnstw-export probe --weights FILE --out FILE`;

function writeOutputs(layers: ConvLayer[], out: string): void {
  const data = writeCnstw(layers);
  fs.mkdirSync(path.dirname(path.resolve(out)), { recursive: true });
  fs.writeFileSync(out, data);
  for (const layer of layers) {
    console.log(
      `${layer.name}: ${layer.outChannels}x${layer.inChannels}x${layer.kernelH}x${layer.kernelW}`,
    );
  }
  const sidecar = probeSidecar(layers);
  fs.writeFileSync(`${out}.probe.json`, JSON.stringify(sidecar));
  const hash = crypto.createHash("sha256").update(data).digest("hex");
  console.log(`${layers.length} layers -> ${out}`);
  console.log(`content sha256: ${hash}`);
}

function cmdExport(args: Args): number {
  if (!args.out) throw new Error("--out is required");
  if (args.source === "tiny") {
    const seed = args.seed ?? 0;
    if (!Number.isInteger(seed)) throw new Error("--seed must be an integer");
    writeOutputs(makeTinyNetwork(seed), args.out);
    return 0;
  }
  if (args.source === "vgg19") {
    writeOutputs(loadVgg19(args.checkpoint, args.truncate ?? "conv5_1"), args.out);
    return 0;
  }
  throw new Error(`--source must be tiny or vgg19, got ${args.source ?? "(none)"}`);
}

function cmdProbe(args: Args): number {
  if (!args.weights || !args.out) throw new Error("probe needs --weights and --out");
  if (!fs.existsSync(args.weights)) {
    throw new UnreachableSourceError(`weight file does not exist: ${args.weights}`);
  }
  const layers = readCnstw(fs.readFileSync(args.weights));
  fs.writeFileSync(args.out, JSON.stringify(probeSidecar(layers)));
  console.log(`wrote ${args.out}`);
  return 0;
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`error: bad-arguments: ${(err as Error).message}`);
    return 2;
  }
  if (args.help || !args.command) {
    console.log(USAGE);
    return args.help ? 0 : 2;
  }
  try {
    if (args.command === "export") return cmdExport(args);
    if (args.command === "probe") return cmdProbe(args);
    console.error(`error: bad-arguments: unknown command ${args.command}`);
    return 2;
  } catch (err) {
    if (err instanceof UnreachableSourceError) {
      console.error(`error: unreachable-source: ${err.message}`);
      return 3;
    }
    if (err instanceof CheckpointStructureError) {
      console.error(`error: checkpoint-structure: ${err.message}`);
      return 4;
    }
    console.error(`error: runtime: ${(err as Error).message}`);
    return 5;
  }
}

process.exitCode = main(process.argv.slice(2));
