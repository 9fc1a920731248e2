/**
 * Deterministic reference model behind the model-identifier interface.
 *
 * Real speech LMs cannot ship inside this package, so extraction is
 * exercised against a self-contained stand-in with the same plumbing: a
 * frame-level speech encoder, an adapter that compresses frames 5x before
 * the decoder, a token embedder, and a stack of L sequence-aware layers.
 * Every weight is derived from the model identifier, so two runs with the
 * same inputs produce bit-identical activations (the idempotence contract).
 *
 * Identifiers look like `ref-lslm-d16l3` (hidden size 16, 3 layers).
 */

import { ModelLoadFailure, SpanResolutionFailure } from "./errors.js";
import type { AudioClip } from "./wav.js";

const ID_PATTERN = /^ref-lslm-d(\d+)l(\d+)$/;
const ENCODER_FEATURES = 8;
const ADAPTER_GROUP = 5;
const FRAME_WINDOW = 256;
const FRAME_HOP = 128;
const DECODE_STEPS = 6;

export const PROMPT_TOKENS = ["system", "answer", "the", "query"];

const DECODE_VOCAB = [
  "the", "a", "is", "was", "in", "on", "of", "and", "to", "it",
  "yes", "no", "maybe", "speech", "text", "sound", "word", "answer",
  "question", "language", "model", "frame", "token", "align", "path",
  "score", "left", "right", "up", "down", "one", "two", "three",
];

export type Matrix = number[][];

export interface ReferenceModel {
  id: string;
  dim: number;
  layerCount: number;
  embedTokens(tokens: string[]): Matrix;
  encodeSpeech(clip: AudioClip): Matrix;
  /** Run layers 1..L over a full input sequence; returns L+1 stacks incl. input. */
  forward(inputRows: Matrix): Matrix[];
  decodeGreedy(finalLayer: Matrix): string;
}

// --- deterministic pseudo-randomness ---------------------------------------

function fnv1a(text: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
}

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function randomMatrix(rand: () => number, rows: number, cols: number, scale: number): Matrix {
  const m: Matrix = [];
  for (let r = 0; r < rows; r++) {
    const row: number[] = [];
    for (let c = 0; c < cols; c++) {
      row.push((rand() * 2 - 1) * scale);
    }
    m.push(row);
  }
  return m;
}

// --- model construction -----------------------------------------------------

export function loadModel(id: string, device = "cpu"): ReferenceModel {
  const match = ID_PATTERN.exec(id);
  if (!match) {
    throw new ModelLoadFailure(`unknown model identifier ${JSON.stringify(id)}`);
  }
  if (device !== "cpu") {
    throw new ModelLoadFailure(`device ${JSON.stringify(device)} not available`);
  }
  const dim = Number(match[1]);
  const layerCount = Number(match[2]);
  if (dim < 1 || layerCount < 1) {
    throw new ModelLoadFailure(`degenerate model geometry in ${JSON.stringify(id)}`);
  }

  const seed = fnv1a(id);
  const scale = 1 / Math.sqrt(dim);
  const rand = mulberry32(seed);
  const encoderProj = randomMatrix(rand, ENCODER_FEATURES, dim, 1.0);
  const adapterProj = randomMatrix(rand, dim, dim, scale);
  const layerWeights: Matrix[] = [];
  const layerBias: number[][] = [];
  for (let l = 0; l < layerCount; l++) {
    layerWeights.push(randomMatrix(rand, dim, dim, scale));
    layerBias.push(randomMatrix(rand, 1, dim, 0.1)[0]);
  }

  const embedToken = (token: string): number[] => {
    const r = mulberry32(fnv1a(token) ^ seed);
    const v: number[] = [];
    let norm = 0;
    for (let c = 0; c < dim; c++) {
      const x = r() * 2 - 1;
      v.push(x);
      norm += x * x;
    }
    norm = Math.sqrt(norm) || 1;
    return v.map((x) => x / norm);
  };

  const matVec = (weights: Matrix, v: number[]): number[] => {
    const out: number[] = new Array(weights[0].length).fill(0);
    for (let r = 0; r < weights.length; r++) {
      const w = weights[r];
      const x = v[r];
      for (let c = 0; c < w.length; c++) {
        out[c] += x * w[c];
      }
    }
    return out;
  };

  const forward = (inputRows: Matrix): Matrix[] => {
    const stacks: Matrix[] = [inputRows.map((row) => [...row])];
    let prev = stacks[0];
    for (let l = 0; l < layerCount; l++) {
      const next: Matrix = [];
      const running: number[] = new Array(dim).fill(0);
      for (let i = 0; i < prev.length; i++) {
        for (let c = 0; c < dim; c++) running[c] += prev[i][c];
        const context = running.map((s) => s / (i + 1));
        const mixed = matVec(
          layerWeights[l],
          prev[i].map((x, c) => x + 0.5 * context[c]),
        );
        next.push(mixed.map((x, c) => Math.tanh(x + layerBias[l][c]) + 0.7 * prev[i][c]));
      }
      stacks.push(next);
      prev = next;
    }
    return stacks;
  };

  const encodeSpeech = (clip: AudioClip): Matrix => {
    const frames = frameFeatures(clip);
    // encoder: per-frame features projected into the hidden space
    const encoded = frames.map((f) => matVec(encoderProj, f).map(Math.tanh));
    // adapter: 5x temporal compression, then a linear map
    const pooled: Matrix = [];
    for (let start = 0; start < encoded.length; start += ADAPTER_GROUP) {
      const group = encoded.slice(start, start + ADAPTER_GROUP);
      const mean = new Array(dim).fill(0);
      for (const row of group) {
        for (let c = 0; c < dim; c++) mean[c] += row[c] / group.length;
      }
      pooled.push(matVec(adapterProj, mean).map(Math.tanh));
    }
    return pooled;
  };

  const decodeGreedy = (finalLayer: Matrix): string => {
    const vocab = DECODE_VOCAB.map((w) => ({ word: w, vec: embedToken(w) }));
    const frames = finalLayer.length;
    const words: string[] = [];
    let carry = new Array<number>(dim).fill(0);
    for (let step = 0; step < DECODE_STEPS; step++) {
      // walk the sequence so every step reads fresh content, not a fixed point
      const row = finalLayer[Math.min(Math.floor((step * frames) / DECODE_STEPS), frames - 1)];
      const state = row.map((x, c) => Math.tanh(x + 0.3 * carry[c]));
      let best = vocab[0];
      let bestScore = -Infinity;
      for (const cand of vocab) {
        if (words.length > 0 && cand.word === words[words.length - 1]) continue;
        let score = 0;
        for (let c = 0; c < dim; c++) score += cand.vec[c] * state[c];
        if (score > bestScore) {
          bestScore = score;
          best = cand;
        }
      }
      words.push(best.word);
      carry = best.vec;
    }
    return words.join(" ");
  };

  return {
    id,
    dim,
    layerCount,
    embedTokens: (tokens) => tokens.map(embedToken),
    encodeSpeech,
    forward,
    decodeGreedy,
  };
}

// --- text and speech front-ends ----------------------------------------------

export function tokenize(text: string): string[] {
  return text
    .toLowerCase()
    .split(/[^a-z0-9']+/)
    .filter((t) => t.length > 0);
}

export function tokenizeQuery(text: string, sampleId: string): string[] {
  const tokens = tokenize(text);
  if (tokens.length === 0) {
    throw new SpanResolutionFailure(
      `${sampleId}: transcript yields no query tokens`,
    );
  }
  return tokens;
}

function frameFeatures(clip: AudioClip): number[][] {
  const { samples } = clip;
  const starts: number[] = [];
  if (samples.length <= FRAME_WINDOW) {
    starts.push(0);
  } else {
    for (let s = 0; s + FRAME_WINDOW <= samples.length; s += FRAME_HOP) {
      starts.push(s);
    }
  }
  return starts.map((s) => {
    const frame = samples.subarray(s, Math.min(s + FRAME_WINDOW, samples.length));
    const n = frame.length;
    let mean = 0;
    let rms = 0;
    let absMean = 0;
    let min = frame[0];
    let max = frame[0];
    let crossings = 0;
    for (let i = 0; i < n; i++) {
      const v = frame[i];
      mean += v / n;
      rms += (v * v) / n;
      absMean += Math.abs(v) / n;
      if (v < min) min = v;
      if (v > max) max = v;
      if (i > 0 && v * frame[i - 1] < 0) crossings++;
    }
    const half = Math.floor(n / 2) || 1;
    let frontRms = 0;
    let backRms = 0;
    for (let i = 0; i < n; i++) {
      if (i < half) frontRms += (frame[i] * frame[i]) / half;
      else backRms += (frame[i] * frame[i]) / Math.max(1, n - half);
    }
    return [
      mean,
      Math.sqrt(rms),
      absMean,
      min,
      max,
      crossings / n,
      Math.sqrt(frontRms),
      Math.sqrt(backRms),
    ];
  });
}
