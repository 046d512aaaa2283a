/**
 * Canonical binary trial container ("EEGT", version 1).
 *
 * Layout, all little-endian:
 *   magic      4 bytes   "EEGT"
 *   version    u16       1
 *   nTrials    u32
 *   nChannels  u32
 *   nSamples   u32
 *   fs         f32       Hz
 *   windows    4 x f32   baseline start/end, activation start/end (s)
 *   names      per channel: u16 byte length + UTF-8 bytes
 *   labels     nTrials x u8, each 0 or 1
 *   payload    nTrials * nChannels * nSamples f32, trial-major then
 *              channel then sample
 */

export const MAGIC = "EEGT";
export const FORMAT_VERSION = 1;

export interface TrialSet {
  /** Trial-major payload, length nTrials * nChannels * nSamples. */
  data: Float32Array;
  nTrials: number;
  nChannels: number;
  nSamples: number;
  labels: Uint8Array;
  fs: number;
  baselineWindow: [number, number];
  activationWindow: [number, number];
  channelNames: string[];
}

export class TrialFileError extends Error {}

/** Serialize a trial set into an EEGT buffer. */
export function encodeTrialFile(trials: TrialSet): Buffer {
  const { nTrials, nChannels, nSamples } = trials;
  if (trials.data.length !== nTrials * nChannels * nSamples) {
    throw new TrialFileError(
      `payload has ${trials.data.length} samples, expected ${nTrials * nChannels * nSamples}`,
    );
  }
  if (trials.labels.length !== nTrials) {
    throw new TrialFileError("labels length must equal nTrials");
  }
  if (trials.channelNames.length !== nChannels) {
    throw new TrialFileError("channelNames length must equal nChannels");
  }
  const nameBlobs = trials.channelNames.map((n) => Buffer.from(n, "utf-8"));
  const nameBytes = nameBlobs.reduce((acc, b) => acc + 2 + b.length, 0);
  const total = 38 + nameBytes + nTrials + 4 * trials.data.length;
  const out = Buffer.alloc(total);

  out.write(MAGIC, 0, "ascii");
  out.writeUInt16LE(FORMAT_VERSION, 4);
  out.writeUInt32LE(nTrials, 6);
  out.writeUInt32LE(nChannels, 10);
  out.writeUInt32LE(nSamples, 14);
  out.writeFloatLE(trials.fs, 18);
  out.writeFloatLE(trials.baselineWindow[0], 22);
  out.writeFloatLE(trials.baselineWindow[1], 26);
  out.writeFloatLE(trials.activationWindow[0], 30);
  out.writeFloatLE(trials.activationWindow[1], 34);

  let offset = 38;
  for (const blob of nameBlobs) {
    out.writeUInt16LE(blob.length, offset);
    blob.copy(out, offset + 2);
    offset += 2 + blob.length;
  }
  Buffer.from(trials.labels).copy(out, offset);
  offset += nTrials;
  for (let i = 0; i < trials.data.length; i++) {
    out.writeFloatLE(trials.data[i], offset + 4 * i);
  }
  return out;
}

/** Parse an EEGT buffer; throws TrialFileError on any malformation. */
export function decodeTrialFile(buffer: Buffer): TrialSet {
  if (buffer.length < 38) {
    throw new TrialFileError("truncated header");
  }
  if (buffer.toString("ascii", 0, 4) !== MAGIC) {
    throw new TrialFileError(`bad magic, not an EEGT file`);
  }
  const version = buffer.readUInt16LE(4);
  if (version !== FORMAT_VERSION) {
    throw new TrialFileError(`unsupported format version ${version}`);
  }
  const nTrials = buffer.readUInt32LE(6);
  const nChannels = buffer.readUInt32LE(10);
  const nSamples = buffer.readUInt32LE(14);
  const fs = buffer.readFloatLE(18);
  const baselineWindow: [number, number] = [buffer.readFloatLE(22), buffer.readFloatLE(26)];
  const activationWindow: [number, number] = [buffer.readFloatLE(30), buffer.readFloatLE(34)];

  let offset = 38;
  const channelNames: string[] = [];
  for (let c = 0; c < nChannels; c++) {
    if (offset + 2 > buffer.length) {
      throw new TrialFileError("truncated channel-name table");
    }
    const len = buffer.readUInt16LE(offset);
    offset += 2;
    if (offset + len > buffer.length) {
      throw new TrialFileError("truncated channel-name table");
    }
    channelNames.push(buffer.toString("utf-8", offset, offset + len));
    offset += len;
  }

  if (offset + nTrials > buffer.length) {
    throw new TrialFileError("truncated label array");
  }
  const labels = new Uint8Array(buffer.subarray(offset, offset + nTrials));
  offset += nTrials;
  for (const label of labels) {
    if (label > 1) {
      throw new TrialFileError("labels outside {0, 1}");
    }
  }

  const expected = 4 * nTrials * nChannels * nSamples;
  if (buffer.length - offset !== expected) {
    throw new TrialFileError(
      `payload is ${buffer.length - offset} bytes, expected ${expected}`,
    );
  }
  const data = new Float32Array(nTrials * nChannels * nSamples);
  for (let i = 0; i < data.length; i++) {
    data[i] = buffer.readFloatLE(offset + 4 * i);
  }
  return {
    data,
    nTrials,
    nChannels,
    nSamples,
    labels,
    fs,
    baselineWindow,
    activationWindow,
    channelNames,
  };
}

/** Byte offset where the f32 payload begins, for violation reports. */
export function payloadOffset(trials: TrialSet): number {
  const nameBytes = trials.channelNames.reduce(
    (acc, n) => acc + 2 + Buffer.byteLength(n, "utf-8"),
    0,
  );
  return 38 + nameBytes + trials.nTrials;
}
