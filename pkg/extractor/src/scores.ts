/**
 * Benchmark score export in the gap-regression CSV schema:
 * `checkpoint_id,group,text_score,speech_score,gap`.
 *
 * Scores arrive as decimal strings (or numbers) and the gap is computed in
 * exact scaled-integer arithmetic, so the emitted column is the precise
 * decimal difference of the two inputs, never a float artifact.
 */

import * as fs from "node:fs";

import { DuplicateCheckpoint, MissingScore } from "./errors.js";

export interface EvalRecord {
  checkpoint_id: string;
  group?: string;
  text_score: string | number;
  speech_score: string | number;
}

interface Decimal {
  units: bigint; // value * 10^places
  places: number;
}

function parseDecimal(value: string | number, what: string): Decimal {
  const text = typeof value === "number" ? String(value) : value.trim();
  const match = /^(-?)(\d+)(?:\.(\d+))?$/.exec(text);
  if (!match) {
    throw new MissingScore(`${what}: not a decimal score: ${JSON.stringify(value)}`);
  }
  const [, sign, whole, frac = ""] = match;
  const units = BigInt(whole + frac) * (sign === "-" ? -1n : 1n);
  return { units, places: frac.length };
}

function rescale(d: Decimal, places: number): bigint {
  return d.units * 10n ** BigInt(places - d.places);
}

function formatUnits(units: bigint, places: number): string {
  const sign = units < 0n ? "-" : "";
  const abs = units < 0n ? -units : units;
  if (places === 0) {
    return `${sign}${abs}`;
  }
  const digits = abs.toString().padStart(places + 1, "0");
  const cut = digits.length - places;
  return `${sign}${digits.slice(0, cut)}.${digits.slice(cut)}`;
}

export function gapString(textScore: string | number, speechScore: string | number): string {
  const t = parseDecimal(textScore, "text_score");
  const s = parseDecimal(speechScore, "speech_score");
  const places = Math.max(t.places, s.places);
  return formatUnits(rescale(t, places) - rescale(s, places), places);
}

function csvField(value: string): string {
  return /[",\n]/.test(value) ? `"${value.replace(/"/g, '""')}"` : value;
}

export function exportScores(records: EvalRecord[], outFile: string): string {
  if (records.length === 0) {
    throw new MissingScore("no score records to export");
  }
  const seen = new Set<string>();
  const lines = ["checkpoint_id,group,text_score,speech_score,gap"];
  for (const rec of records) {
    if (!rec.checkpoint_id) {
      throw new MissingScore("record without checkpoint_id");
    }
    if (seen.has(rec.checkpoint_id)) {
      throw new DuplicateCheckpoint(`duplicate checkpoint id ${rec.checkpoint_id}`);
    }
    seen.add(rec.checkpoint_id);
    if (rec.text_score === undefined || rec.text_score === null || rec.text_score === "") {
      throw new MissingScore(`${rec.checkpoint_id}: missing text_score`);
    }
    if (rec.speech_score === undefined || rec.speech_score === null || rec.speech_score === "") {
      throw new MissingScore(`${rec.checkpoint_id}: missing speech_score`);
    }
    const text = typeof rec.text_score === "number" ? String(rec.text_score) : rec.text_score.trim();
    const speech =
      typeof rec.speech_score === "number" ? String(rec.speech_score) : rec.speech_score.trim();
    const gap = gapString(text, speech);
    lines.push(
      [
        csvField(rec.checkpoint_id),
        csvField(rec.group ?? ""),
        text,
        speech,
        gap,
      ].join(","),
    );
  }
  fs.writeFileSync(outFile, lines.join("\n") + "\n");
  return outFile;
}

export function loadEvalRecords(file: string): EvalRecord[] {
  let raw: unknown;
  try {
    raw = JSON.parse(fs.readFileSync(file, "utf-8"));
  } catch (err) {
    throw new MissingScore(`cannot read eval results ${file}: ${String(err)}`);
  }
  if (!Array.isArray(raw)) {
    throw new MissingScore(`${file}: expected a list of records`);
  }
  return raw as EvalRecord[];
}
