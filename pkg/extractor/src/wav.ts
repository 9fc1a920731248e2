/**
 * Minimal WAV codec: 16-bit PCM mono, the only format the extractor accepts.
 */

import { AudioDecodeFailure } from "./errors.js";

export interface AudioClip {
  sampleRate: number;
  /** samples scaled to [-1, 1] */
  samples: Float64Array;
}

export function decodeWav(buf: Buffer, label: string): AudioClip {
  if (buf.length < 44) {
    throw new AudioDecodeFailure(`${label}: file too short for a WAV header`);
  }
  if (buf.toString("ascii", 0, 4) !== "RIFF" || buf.toString("ascii", 8, 12) !== "WAVE") {
    throw new AudioDecodeFailure(`${label}: not a RIFF/WAVE file`);
  }

  let offset = 12;
  let sampleRate = 0;
  let bitsPerSample = 0;
  let channels = 0;
  let data: Buffer | null = null;
  while (offset + 8 <= buf.length) {
    const chunkId = buf.toString("ascii", offset, offset + 4);
    const chunkSize = buf.readUInt32LE(offset + 4);
    const body = offset + 8;
    if (body + chunkSize > buf.length) {
      throw new AudioDecodeFailure(`${label}: truncated ${chunkId.trim()} chunk`);
    }
    if (chunkId === "fmt ") {
      const format = buf.readUInt16LE(body);
      channels = buf.readUInt16LE(body + 2);
      sampleRate = buf.readUInt32LE(body + 4);
      bitsPerSample = buf.readUInt16LE(body + 14);
      if (format !== 1) {
        throw new AudioDecodeFailure(`${label}: only PCM (format 1) is supported`);
      }
    } else if (chunkId === "data") {
      data = buf.subarray(body, body + chunkSize);
    }
    offset = body + chunkSize + (chunkSize % 2);
  }

  if (sampleRate === 0 || data === null) {
    throw new AudioDecodeFailure(`${label}: missing fmt or data chunk`);
  }
  if (channels !== 1 || bitsPerSample !== 16) {
    throw new AudioDecodeFailure(
      `${label}: expected 16-bit mono PCM, got ${bitsPerSample}-bit ${channels}ch`,
    );
  }
  const n = Math.floor(data.length / 2);
  if (n === 0) {
    throw new AudioDecodeFailure(`${label}: no samples`);
  }
  const samples = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    samples[i] = data.readInt16LE(2 * i) / 32768;
  }
  return { sampleRate, samples };
}

/** Encode 16-bit mono PCM; used by tests and sample-data tooling. */
export function encodeWav(samples: Float64Array | number[], sampleRate: number): Buffer {
  const n = samples.length;
  const buf = Buffer.alloc(44 + 2 * n);
  buf.write("RIFF", 0, "ascii");
  buf.writeUInt32LE(36 + 2 * n, 4);
  buf.write("WAVE", 8, "ascii");
  buf.write("fmt ", 12, "ascii");
  buf.writeUInt32LE(16, 16);
  buf.writeUInt16LE(1, 20); // PCM
  buf.writeUInt16LE(1, 22); // mono
  buf.writeUInt32LE(sampleRate, 24);
  buf.writeUInt32LE(sampleRate * 2, 28);
  buf.writeUInt16LE(2, 32);
  buf.writeUInt16LE(16, 34);
  buf.write("data", 36, "ascii");
  buf.writeUInt32LE(2 * n, 40);
  for (let i = 0; i < n; i++) {
    const v = Math.max(-1, Math.min(1, Number(samples[i])));
    // symmetric with the decoder's /32768; +1.0 clamps to the int16 max
    buf.writeInt16LE(Math.max(-32768, Math.min(32767, Math.round(v * 32768))), 44 + 2 * i);
  }
  return buf;
}
