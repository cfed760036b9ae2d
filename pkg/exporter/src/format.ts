/** Binary descriptor-file format shared with the benchmark harness.
 *
 * Byte layout, all integers little-endian, no padding:
 *
 *   magic 'VPRD' | version u16=1 | technique_id u8-len + UTF-8 (<= 64 bytes)
 *   | count u32 | dim u32 | manifest: count x (u16 name-len + UTF-8)
 *   | payload: count x dim float32, row-major
 */

import * as fs from "fs";

import { FormatError } from "./errors.js";

export const MAGIC = "VPRD";
export const VERSION = 1;
export const MAX_TECHNIQUE_ID_BYTES = 64;

export interface DescriptorFile {
  techniqueId: string;
  names: string[];
  /** count x dim, row-major. */
  rows: Float32Array;
  count: number;
  dim: number;
}

export function encodeDescriptorFile(
  rows: Float32Array,
  count: number,
  dim: number,
  names: string[],
  techniqueId: string,
): Buffer {
  if (count < 1 || dim < 1) {
    throw new FormatError(`count and dim must be >= 1, got ${count}, ${dim}`);
  }
  if (rows.length !== count * dim) {
    throw new FormatError(`payload holds ${rows.length} floats, expected ${count * dim}`);
  }
  if (names.length !== count) {
    throw new FormatError(`${names.length} names for ${count} rows`);
  }
  if (new Set(names).size !== names.length) {
    throw new FormatError("manifest names must be unique");
  }
  for (let i = 0; i < rows.length; i++) {
    if (!Number.isFinite(rows[i])) {
      throw new FormatError(`row ${Math.floor(i / dim)} holds a non-finite value`);
    }
  }
  const idBytes = Buffer.from(techniqueId, "utf-8");
  if (idBytes.length < 1 || idBytes.length > MAX_TECHNIQUE_ID_BYTES) {
    throw new FormatError(`technique_id must be 1..${MAX_TECHNIQUE_ID_BYTES} UTF-8 bytes`);
  }

  const nameBuffers = names.map((n) => Buffer.from(n, "utf-8"));
  const headerSize =
    4 + 2 + 1 + idBytes.length + 8 + nameBuffers.reduce((s, b) => s + 2 + b.length, 0);
  const out = Buffer.alloc(headerSize + count * dim * 4);
  let offset = 0;
  offset += out.write(MAGIC, offset, "ascii");
  offset = out.writeUInt16LE(VERSION, offset);
  offset = out.writeUInt8(idBytes.length, offset);
  offset += idBytes.copy(out, offset);
  offset = out.writeUInt32LE(count, offset);
  offset = out.writeUInt32LE(dim, offset);
  for (const nb of nameBuffers) {
    offset = out.writeUInt16LE(nb.length, offset);
    offset += nb.copy(out, offset);
  }
  for (let i = 0; i < rows.length; i++) {
    offset = out.writeFloatLE(rows[i], offset);
  }
  return out;
}

export function writeDescriptorFile(
  path: string,
  rows: Float32Array,
  count: number,
  dim: number,
  names: string[],
  techniqueId: string,
): void {
  const data = encodeDescriptorFile(rows, count, dim, names, techniqueId);
  const fd = fs.openSync(path, "w");
  try {
    fs.writeSync(fd, data);
    fs.fsyncSync(fd);
  } finally {
    fs.closeSync(fd);
  }
}

class Cursor {
  offset = 0;

  constructor(private data: Buffer) {}

  take(n: number, what: string): Buffer {
    if (this.offset + n > this.data.length) {
      throw new FormatError(`file ends inside ${what}`);
    }
    const piece = this.data.subarray(this.offset, this.offset + n);
    this.offset += n;
    return piece;
  }

  remaining(): number {
    return this.data.length - this.offset;
  }
}

/** Parse and validate a descriptor file (the exporter's self-check). */
export function readDescriptorFile(path: string): DescriptorFile {
  const cur = new Cursor(fs.readFileSync(path));
  if (cur.take(4, "magic").toString("ascii") !== MAGIC) {
    throw new FormatError(`${path} does not start with the descriptor magic`);
  }
  const version = cur.take(2, "version").readUInt16LE(0);
  if (version !== VERSION) {
    throw new FormatError(`${path}: version ${version} not supported`);
  }
  const idLen = cur.take(1, "technique id length").readUInt8(0);
  if (idLen < 1 || idLen > MAX_TECHNIQUE_ID_BYTES) {
    throw new FormatError(`${path}: technique id length ${idLen} out of range`);
  }
  const techniqueId = cur.take(idLen, "technique id").toString("utf-8");
  const count = cur.take(4, "count").readUInt32LE(0);
  const dim = cur.take(4, "dim").readUInt32LE(0);
  if (count < 1 || dim < 1) {
    throw new FormatError(`${path}: count and dim must be >= 1`);
  }
  const names: string[] = [];
  for (let i = 0; i < count; i++) {
    const nameLen = cur.take(2, `manifest entry ${i}`).readUInt16LE(0);
    names.push(cur.take(nameLen, `manifest entry ${i}`).toString("utf-8"));
  }
  if (new Set(names).size !== names.length) {
    throw new FormatError(`${path}: manifest names are not unique`);
  }
  const payloadBytes = count * dim * 4;
  if (cur.remaining() < payloadBytes) {
    throw new FormatError(`${path}: payload truncated`);
  }
  if (cur.remaining() > payloadBytes) {
    throw new FormatError(`${path}: trailing bytes after payload`);
  }
  const payload = cur.take(payloadBytes, "payload");
  const rows = new Float32Array(count * dim);
  for (let i = 0; i < rows.length; i++) {
    rows[i] = payload.readFloatLE(i * 4);
    if (!Number.isFinite(rows[i])) {
      throw new FormatError(`${path}: row ${Math.floor(i / dim)} holds a non-finite value`);
    }
  }
  return { techniqueId, names, rows, count, dim };
}
