#!/usr/bin/env node
/**
 * Extractor CLI. Exit codes: 0 success, 1 domain error, 2 usage error.
 *
 *   alignscope-extract extract --config config.json
 *   alignscope-extract export-scores --in results.json --out scores.csv
 *   alignscope-extract reinject --manifest m.json --model ref-lslm-d16l3 --out responses.csv
 */

import { ExtractorError } from "./errors.js";
import { extract, loadConfig } from "./extract.js";
import { reinject, writeResponses } from "./reinject.js";
import { exportScores, loadEvalRecords } from "./scores.js";

const USAGE = `usage:
  alignscope-extract extract --config <config.json>
  alignscope-extract export-scores --in <results.json> --out <scores.csv>
  alignscope-extract reinject --manifest <manifest.json> --model <id> --out <responses.csv> [--device cpu]`;

function parseFlags(argv: string[], required: string[], optional: string[] = []): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith("--") || value === undefined) {
      throw new UsageError(`bad argument ${key}`);
    }
    flags.set(key.slice(2), value);
  }
  for (const need of required) {
    if (!flags.has(need)) {
      throw new UsageError(`missing --${need}`);
    }
  }
  for (const key of flags.keys()) {
    if (!required.includes(key) && !optional.includes(key)) {
      throw new UsageError(`unknown flag --${key}`);
    }
  }
  return flags;
}

class UsageError extends Error {}

export function run(argv: string[]): number {
  try {
    const [command, ...rest] = argv;
    if (command === "extract") {
      const flags = parseFlags(rest, ["config"]);
      const manifest = extract(loadConfig(flags.get("config")!));
      console.log(`wrote ${manifest}`);
      return 0;
    }
    if (command === "export-scores") {
      const flags = parseFlags(rest, ["in", "out"]);
      const out = exportScores(loadEvalRecords(flags.get("in")!), flags.get("out")!);
      console.log(`wrote ${out}`);
      return 0;
    }
    if (command === "reinject") {
      const flags = parseFlags(rest, ["manifest", "model", "out"], ["device"]);
      const rows = reinject(
        flags.get("manifest")!,
        flags.get("model")!,
        flags.get("device") ?? "cpu",
      );
      const out = writeResponses(rows, flags.get("out")!);
      console.log(`wrote ${out} (${rows.length} responses)`);
      return 0;
    }
    console.error(USAGE);
    return 2;
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`usage error: ${err.message}\n${USAGE}`);
      return 2;
    }
    if (err instanceof ExtractorError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(run(process.argv.slice(2)));
}
