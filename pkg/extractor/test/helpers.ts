import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { encodeWav } from "../src/wav.js";
import type { ExtractionConfig } from "../src/extract.js";

export const MODEL_ID = "ref-lslm-d16l3";

export function tempDir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), "extractor-test-"));
}

/** Deterministic pseudo-noise clip; seed changes the waveform. */
export function makeClip(seed: number, seconds = 0.3, sampleRate = 8000): Float64Array {
  const n = Math.floor(seconds * sampleRate);
  const out = new Float64Array(n);
  let state = seed >>> 0 || 1;
  for (let i = 0; i < n; i++) {
    state = (1103515245 * state + 12345) % 2147483648;
    const noise = state / 1073741824 - 1;
    out[i] = 0.4 * Math.sin((2 * Math.PI * (150 + seed * 37) * i) / sampleRate) + 0.3 * noise;
  }
  return out;
}

export function writeClip(dir: string, name: string, seed: number, seconds = 0.3): string {
  const file = path.join(dir, name);
  fs.writeFileSync(file, encodeWav(makeClip(seed, seconds), 8000));
  return file;
}

export function basicConfig(dir: string, overrides: Partial<ExtractionConfig> = {}): ExtractionConfig {
  writeClip(dir, "a.wav", 1);
  writeClip(dir, "b.wav", 2, 0.45);
  return {
    model: MODEL_ID,
    device: "cpu",
    span_policy: "query_only",
    samples: [
      { id: "q-apple", speech_file: "a.wav", transcript: "What color is an apple?" },
      { id: "q-ocean", speech_file: "b.wav", transcript: "How deep is the ocean floor?" },
    ],
    output_dir: "dump",
    ...overrides,
  };
}
