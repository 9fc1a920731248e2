/**
 * Activation container IO: raw float32 little-endian payloads (row-major,
 * layer 0 first, no header) plus the JSON manifest. Byte length of a payload
 * is exactly (L+1) * T * d * 4. This mirrors the analysis toolkit's on-disk
 * contract; its `alignscope validate` subcommand is the reference check.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { ValidationFailure } from "./errors.js";

export const MANIFEST_VERSION = 1;

export interface SampleEntry {
  id: string;
  speech_frames: number;
  text_tokens: number;
  speech_payload: string;
  text_payload: string;
  text_token_strings?: string[];
  stale?: boolean;
}

export interface Manifest {
  version: number;
  dim: number;
  layer_count: number;
  samples: SampleEntry[];
  metadata?: Record<string, unknown>;
}

/** A layer stack is (L+1) matrices of shape T x d, layer 0 first. */
export type LayerStack = number[][][];

export function stackBytes(stack: LayerStack): Buffer {
  const layers = stack.length;
  const rows = stack[0].length;
  const dim = stack[0][0].length;
  const buf = Buffer.alloc(layers * rows * dim * 4);
  let off = 0;
  for (const layer of stack) {
    if (layer.length !== rows) {
      throw new ValidationFailure(`ragged layer: ${layer.length} rows, expected ${rows}`);
    }
    for (const row of layer) {
      if (row.length !== dim) {
        throw new ValidationFailure(`ragged row: ${row.length} cols, expected ${dim}`);
      }
      for (const v of row) {
        if (!Number.isFinite(v)) {
          throw new ValidationFailure("non-finite value in layer stack");
        }
        buf.writeFloatLE(Math.fround(v), off);
        off += 4;
      }
    }
  }
  return buf;
}

export function writeStack(stack: LayerStack, file: string): void {
  fs.writeFileSync(file, stackBytes(stack));
}

export function readStack(
  file: string,
  layerCount: number,
  frames: number,
  dim: number,
): LayerStack {
  const buf = fs.readFileSync(file);
  const expected = (layerCount + 1) * frames * dim * 4;
  if (buf.length !== expected) {
    throw new ValidationFailure(`${file}: ${buf.length} bytes, expected ${expected}`);
  }
  const stack: LayerStack = [];
  let off = 0;
  for (let l = 0; l <= layerCount; l++) {
    const layer: number[][] = [];
    for (let t = 0; t < frames; t++) {
      const row: number[] = [];
      for (let c = 0; c < dim; c++) {
        row.push(buf.readFloatLE(off));
        off += 4;
      }
      layer.push(row);
    }
    stack.push(layer);
  }
  return stack;
}

export function writeManifest(manifest: Manifest, dir: string): string {
  const file = path.join(dir, "manifest.json");
  fs.writeFileSync(file, JSON.stringify(manifest, null, 2) + "\n");
  return file;
}

export function readManifest(file: string): Manifest {
  const raw: unknown = JSON.parse(fs.readFileSync(file, "utf-8"));
  const manifest = raw as Manifest;
  if (manifest.version !== MANIFEST_VERSION) {
    throw new ValidationFailure(`${file}: unsupported manifest version`);
  }
  return manifest;
}

/**
 * Local re-check of the container rules (size law, unique non-empty ids,
 * finite payloads) so extract() can refuse to hand back a bad directory
 * even when the analysis CLI is not installed.
 */
export function validateContainer(manifestFile: string): Manifest {
  const manifest = readManifest(manifestFile);
  const dir = path.dirname(manifestFile);
  if (!Number.isInteger(manifest.dim) || manifest.dim <= 0) {
    throw new ValidationFailure("dim must be a positive integer");
  }
  if (!Number.isInteger(manifest.layer_count) || manifest.layer_count < 1) {
    throw new ValidationFailure("layer_count must be >= 1");
  }
  const seen = new Set<string>();
  for (const s of manifest.samples) {
    if (!s.id) throw new ValidationFailure("empty sample id");
    if (seen.has(s.id)) throw new ValidationFailure(`duplicate sample id ${s.id}`);
    seen.add(s.id);
    for (const [payload, frames] of [
      [s.speech_payload, s.speech_frames],
      [s.text_payload, s.text_tokens],
    ] as const) {
      const file = path.join(dir, payload);
      const expected = (manifest.layer_count + 1) * frames * manifest.dim * 4;
      const actual = fs.statSync(file).size;
      if (actual !== expected) {
        throw new ValidationFailure(
          `${s.id}: ${payload} is ${actual} bytes, expected ${expected}`,
        );
      }
      const buf = fs.readFileSync(file);
      for (let off = 0; off < buf.length; off += 4) {
        if (!Number.isFinite(buf.readFloatLE(off))) {
          throw new ValidationFailure(`${s.id}: non-finite value in ${payload}`);
        }
      }
    }
  }
  return manifest;
}
