/**
 * Binary containers shared with the mapping toolkit, both little-endian:
 *
 * dataset  (magic "A2XD"): magic | version u16 | flags u16 | n u64 |
 *   channels u16 | height u16 | width u16 | num_classes u32, then n labels
 *   (u32) and n*C*H*W pixels (u8, sample -> channel -> row -> column).
 * embeddings (magic "A2XE"): magic | version u16 | flags u16 | n u64 |
 *   dim u32 | num_classes u32, then n interleaved rows of
 *   (label u32, dim * f32).
 */

import { readFileSync, writeFileSync } from 'fs';

export const CONTAINER_VERSION = 1;
const DATASET_HEADER_SIZE = 26;
const EMBEDDINGS_HEADER_SIZE = 24;

export class FormatError extends Error {}
export class ValidationError extends Error {}

export interface Dataset {
  n: number;
  channels: number;
  height: number;
  width: number;
  numClasses: number;
  labels: Uint32Array;
  pixels: Uint8Array;
}

export interface Embeddings {
  n: number;
  dim: number;
  numClasses: number;
  labels: Uint32Array;
  /** row-major n x dim */
  vectors: Float32Array;
}

function magicOf(buf: Buffer): string {
  return buf.toString('latin1', 0, 4);
}

export function readDataset(path: string): Dataset {
  const buf = readFileSync(path);
  if (buf.length < DATASET_HEADER_SIZE) {
    throw new FormatError(`truncated dataset header: ${buf.length} bytes`);
  }
  if (magicOf(buf) !== 'A2XD') {
    throw new FormatError(`bad magic ${JSON.stringify(magicOf(buf))}, expected "A2XD"`);
  }
  const version = buf.readUInt16LE(4);
  if (version !== CONTAINER_VERSION) {
    throw new FormatError(`unsupported dataset version ${version}`);
  }
  if (buf.readUInt16LE(6) !== 0) {
    throw new FormatError('unknown flags');
  }
  const nBig = buf.readBigUInt64LE(8);
  if (nBig > BigInt(Number.MAX_SAFE_INTEGER)) {
    throw new FormatError('dimension overflow in dataset header');
  }
  const n = Number(nBig);
  const channels = buf.readUInt16LE(16);
  const height = buf.readUInt16LE(18);
  const width = buf.readUInt16LE(20);
  const numClasses = buf.readUInt32LE(22);
  const pixelCount = n * channels * height * width;
  if (!Number.isSafeInteger(pixelCount)) {
    throw new FormatError('dimension overflow in dataset header');
  }
  const needed = DATASET_HEADER_SIZE + 4 * n + pixelCount;
  if (buf.length < needed) {
    throw new FormatError(`truncated dataset: wanted ${needed} bytes, got ${buf.length}`);
  }
  const labels = new Uint32Array(n);
  for (let i = 0; i < n; i++) {
    labels[i] = buf.readUInt32LE(DATASET_HEADER_SIZE + 4 * i);
    if (labels[i] >= numClasses) {
      throw new ValidationError(`label ${labels[i]} out of range [0, ${numClasses})`);
    }
  }
  const pixelStart = DATASET_HEADER_SIZE + 4 * n;
  const pixels = new Uint8Array(buf.subarray(pixelStart, pixelStart + pixelCount));
  return { n, channels, height, width, numClasses, labels, pixels };
}

export function validateEmbeddings(e: Embeddings): void {
  if (e.dim < 1 || e.numClasses < 1) {
    throw new ValidationError('dim and numClasses must be positive');
  }
  if (e.labels.length !== e.n || e.vectors.length !== e.n * e.dim) {
    throw new ValidationError('labels/vectors sized inconsistently with n and dim');
  }
  const seen = new Set<number>();
  for (let i = 0; i < e.n; i++) {
    if (e.labels[i] >= e.numClasses) {
      throw new ValidationError(`label ${e.labels[i]} out of range [0, ${e.numClasses})`);
    }
    seen.add(e.labels[i]);
  }
  if (seen.size !== e.numClasses) {
    throw new ValidationError('every class must have at least one row');
  }
  for (let i = 0; i < e.vectors.length; i++) {
    if (!Number.isFinite(e.vectors[i])) {
      throw new ValidationError('vectors contain NaN or Inf');
    }
  }
}

export function encodeEmbeddings(e: Embeddings): Buffer {
  validateEmbeddings(e);
  const rowSize = 4 + 4 * e.dim;
  const buf = Buffer.alloc(EMBEDDINGS_HEADER_SIZE + e.n * rowSize);
  buf.write('A2XE', 0, 'latin1');
  buf.writeUInt16LE(CONTAINER_VERSION, 4);
  buf.writeUInt16LE(0, 6);
  buf.writeBigUInt64LE(BigInt(e.n), 8);
  buf.writeUInt32LE(e.dim, 16);
  buf.writeUInt32LE(e.numClasses, 20);
  for (let i = 0; i < e.n; i++) {
    const off = EMBEDDINGS_HEADER_SIZE + i * rowSize;
    buf.writeUInt32LE(e.labels[i], off);
    for (let c = 0; c < e.dim; c++) {
      buf.writeFloatLE(e.vectors[i * e.dim + c], off + 4 + 4 * c);
    }
  }
  return buf;
}

export function writeEmbeddings(path: string, e: Embeddings): void {
  writeFileSync(path, encodeEmbeddings(e));
}

export function readEmbeddings(path: string): Embeddings {
  const buf = readFileSync(path);
  if (buf.length < EMBEDDINGS_HEADER_SIZE) {
    throw new FormatError(`truncated embeddings header: ${buf.length} bytes`);
  }
  if (magicOf(buf) !== 'A2XE') {
    throw new FormatError(`bad magic ${JSON.stringify(magicOf(buf))}, expected "A2XE"`);
  }
  if (buf.readUInt16LE(4) !== CONTAINER_VERSION) {
    throw new FormatError('unsupported embeddings version');
  }
  if (buf.readUInt16LE(6) !== 0) {
    throw new FormatError('unknown flags');
  }
  const n = Number(buf.readBigUInt64LE(8));
  const dim = buf.readUInt32LE(16);
  const numClasses = buf.readUInt32LE(20);
  const rowSize = 4 + 4 * dim;
  if (buf.length < EMBEDDINGS_HEADER_SIZE + n * rowSize) {
    throw new FormatError('truncated embeddings rows');
  }
  const labels = new Uint32Array(n);
  const vectors = new Float32Array(n * dim);
  for (let i = 0; i < n; i++) {
    const off = EMBEDDINGS_HEADER_SIZE + i * rowSize;
    labels[i] = buf.readUInt32LE(off);
    for (let c = 0; c < dim; c++) {
      vectors[i * dim + c] = buf.readFloatLE(off + 4 + 4 * c);
    }
  }
  const e = { n, dim, numClasses, labels, vectors };
  validateEmbeddings(e);
  return e;
}

/** Test/demo helper: serialize a dataset in the A2XD layout. */
export function encodeDataset(ds: Dataset): Buffer {
  const pixelCount = ds.n * ds.channels * ds.height * ds.width;
  if (ds.labels.length !== ds.n || ds.pixels.length !== pixelCount) {
    throw new ValidationError('labels/pixels sized inconsistently with header fields');
  }
  for (const label of ds.labels) {
    if (label >= ds.numClasses) {
      throw new ValidationError(`label ${label} out of range [0, ${ds.numClasses})`);
    }
  }
  const buf = Buffer.alloc(DATASET_HEADER_SIZE + 4 * ds.n + pixelCount);
  buf.write('A2XD', 0, 'latin1');
  buf.writeUInt16LE(CONTAINER_VERSION, 4);
  buf.writeUInt16LE(0, 6);
  buf.writeBigUInt64LE(BigInt(ds.n), 8);
  buf.writeUInt16LE(ds.channels, 16);
  buf.writeUInt16LE(ds.height, 18);
  buf.writeUInt16LE(ds.width, 20);
  buf.writeUInt32LE(ds.numClasses, 22);
  for (let i = 0; i < ds.n; i++) {
    buf.writeUInt32LE(ds.labels[i], DATASET_HEADER_SIZE + 4 * i);
  }
  Buffer.from(ds.pixels).copy(buf, DATASET_HEADER_SIZE + 4 * ds.n);
  return buf;
}

export function writeDataset(path: string, ds: Dataset): void {
  writeFileSync(path, encodeDataset(ds));
}
