/**
 * Hidden-state extraction: one forward pass per modality per sample, with
 * layers 0..L of the requested span written into the activation container.
 *
 * Both modalities are run behind the same fixed system prompt. Under the
 * default `query_only` span policy the stored matrices cover only the query
 * positions (prompt tokens would dilute downstream pooling); `full_prompt`
 * keeps everything and is retained for ablations. The policy used is
 * recorded in the manifest metadata.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import {
  LayerStack,
  Manifest,
  SampleEntry,
  validateContainer,
  writeManifest,
  writeStack,
} from "./binary.js";
import { AudioDecodeFailure, ConfigError } from "./errors.js";
import { PROMPT_TOKENS, loadModel, tokenizeQuery, type Matrix } from "./model.js";
import { decodeWav } from "./wav.js";

export type SpanPolicy = "query_only" | "full_prompt";

export interface SampleSpec {
  id: string;
  speech_file: string;
  transcript: string;
}

export interface ExtractionConfig {
  model: string;
  device?: string;
  span_policy?: SpanPolicy;
  /** layer selection; only "all" is supported and it is the default */
  layers?: "all";
  samples: SampleSpec[];
  output_dir: string;
}

export function loadConfig(file: string): ExtractionConfig {
  let raw: unknown;
  try {
    raw = JSON.parse(fs.readFileSync(file, "utf-8"));
  } catch (err) {
    throw new ConfigError(`cannot read config ${file}: ${String(err)}`);
  }
  const cfg = raw as ExtractionConfig;
  if (typeof cfg.model !== "string" || !cfg.model) {
    throw new ConfigError("config: missing model identifier");
  }
  if (typeof cfg.output_dir !== "string" || !cfg.output_dir) {
    throw new ConfigError("config: missing output_dir");
  }
  if (!Array.isArray(cfg.samples) || cfg.samples.length === 0) {
    throw new ConfigError("config: samples must be a non-empty list");
  }
  if (cfg.span_policy !== undefined && cfg.span_policy !== "query_only" && cfg.span_policy !== "full_prompt") {
    throw new ConfigError(`config: unknown span_policy ${JSON.stringify(cfg.span_policy)}`);
  }
  if (cfg.layers !== undefined && cfg.layers !== "all") {
    throw new ConfigError('config: only layers: "all" is supported');
  }
  const seen = new Set<string>();
  for (const s of cfg.samples) {
    if (!s.id || typeof s.id !== "string") {
      throw new ConfigError("config: every sample needs a non-empty id");
    }
    if (seen.has(s.id)) {
      throw new ConfigError(`config: duplicate sample id ${JSON.stringify(s.id)}`);
    }
    seen.add(s.id);
    if (typeof s.speech_file !== "string" || typeof s.transcript !== "string") {
      throw new ConfigError(`config: sample ${s.id} needs speech_file and transcript`);
    }
  }
  return cfg;
}

function sliceSpan(stacks: Matrix[], promptLen: number, policy: SpanPolicy): LayerStack {
  if (policy === "full_prompt") {
    return stacks;
  }
  return stacks.map((layer) => layer.slice(promptLen));
}

export function extract(config: ExtractionConfig, baseDir = "."): string {
  const model = loadModel(config.model, config.device ?? "cpu");
  const policy: SpanPolicy = config.span_policy ?? "query_only";
  const outDir = path.resolve(baseDir, config.output_dir);
  fs.mkdirSync(outDir, { recursive: true });

  const promptRows = model.embedTokens(PROMPT_TOKENS);
  const entries: SampleEntry[] = [];

  for (const sample of config.samples) {
    const wavPath = path.resolve(baseDir, sample.speech_file);
    let wavBytes: Buffer;
    try {
      wavBytes = fs.readFileSync(wavPath);
    } catch {
      throw new AudioDecodeFailure(`${sample.id}: cannot read ${wavPath}`);
    }
    const clip = decodeWav(wavBytes, sample.id);
    const queryTokens = tokenizeQuery(sample.transcript, sample.id);

    const speechQuery = model.encodeSpeech(clip);
    const speechStacks = model.forward([...promptRows, ...speechQuery]);
    const textQuery = model.embedTokens(queryTokens);
    const textStacks = model.forward([...promptRows, ...textQuery]);

    const speechSpan = sliceSpan(speechStacks, PROMPT_TOKENS.length, policy);
    const textSpan = sliceSpan(textStacks, PROMPT_TOKENS.length, policy);

    const speechPayload = `${sample.id}.speech.bin`;
    const textPayload = `${sample.id}.text.bin`;
    writeStack(speechSpan, path.join(outDir, speechPayload));
    writeStack(textSpan, path.join(outDir, textPayload));

    const tokenStrings =
      policy === "query_only" ? queryTokens : [...PROMPT_TOKENS, ...queryTokens];
    entries.push({
      id: sample.id,
      speech_frames: speechSpan[0].length,
      text_tokens: textSpan[0].length,
      speech_payload: speechPayload,
      text_payload: textPayload,
      text_token_strings: tokenStrings,
    });
  }

  const manifest: Manifest = {
    version: 1,
    dim: model.dim,
    layer_count: model.layerCount,
    samples: entries,
    metadata: {
      extractor: {
        model: model.id,
        device: config.device ?? "cpu",
        span_policy: policy,
        prompt_tokens: PROMPT_TOKENS.length,
      },
    },
  };
  const manifestPath = writeManifest(manifest, outDir);
  validateContainer(manifestPath);
  return manifestPath;
}
