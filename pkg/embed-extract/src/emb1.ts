/**
 * EMB1 binary embedding-matrix format.
 *
 * Layout: magic "EMB1" (4 bytes), u8 dtype flag (0 = f32, 1 = f64),
 * u64 little-endian row count n, u64 little-endian column count d,
 * then n*d row-major little-endian values.
 */

import { promises as fs } from 'fs';

export type Emb1Dtype = 'f32' | 'f64';

const MAGIC = Buffer.from('EMB1', 'ascii');
const HEADER_BYTES = 4 + 1 + 8 + 8;

export interface Emb1Matrix {
  rows: number;
  cols: number;
  dtype: Emb1Dtype;
  /** row-major values, rows * cols entries */
  data: Float64Array;
}

export function encodeEmb1(
  vectors: ArrayLike<number>[],
  dtype: Emb1Dtype = 'f64',
): Buffer {
  const rows = vectors.length;
  if (rows === 0) {
    throw new Error('EMB1 matrix must have at least one row');
  }
  const cols = vectors[0].length;
  if (cols === 0) {
    throw new Error('EMB1 matrix must have at least one column');
  }
  const itemSize = dtype === 'f32' ? 4 : 8;
  const buffer = Buffer.alloc(HEADER_BYTES + rows * cols * itemSize);
  MAGIC.copy(buffer, 0);
  buffer.writeUInt8(dtype === 'f32' ? 0 : 1, 4);
  buffer.writeBigUInt64LE(BigInt(rows), 5);
  buffer.writeBigUInt64LE(BigInt(cols), 13);
  const view = new DataView(buffer.buffer, buffer.byteOffset + HEADER_BYTES);
  let offset = 0;
  for (let i = 0; i < rows; i++) {
    const row = vectors[i];
    if (row.length !== cols) {
      throw new Error(`row ${i} has ${row.length} values, expected ${cols}`);
    }
    for (let j = 0; j < cols; j++) {
      const value = row[j];
      if (!Number.isFinite(value)) {
        throw new Error(`non-finite value at row ${i}, col ${j}`);
      }
      if (dtype === 'f32') {
        view.setFloat32(offset, value, true);
        offset += 4;
      } else {
        view.setFloat64(offset, value, true);
        offset += 8;
      }
    }
  }
  return buffer;
}

export function decodeEmb1(raw: Buffer): Emb1Matrix {
  if (raw.length < HEADER_BYTES || !raw.subarray(0, 4).equals(MAGIC)) {
    throw new Error('not an EMB1 file (bad magic or truncated header)');
  }
  const flag = raw.readUInt8(4);
  if (flag !== 0 && flag !== 1) {
    throw new Error(`bad EMB1 dtype flag ${flag}`);
  }
  const dtype: Emb1Dtype = flag === 0 ? 'f32' : 'f64';
  const rows = Number(raw.readBigUInt64LE(5));
  const cols = Number(raw.readBigUInt64LE(13));
  const itemSize = flag === 0 ? 4 : 8;
  const expected = HEADER_BYTES + rows * cols * itemSize;
  if (raw.length !== expected) {
    throw new Error(`EMB1 payload is ${raw.length} bytes, expected ${expected}`);
  }
  const data = new Float64Array(rows * cols);
  const view = new DataView(raw.buffer, raw.byteOffset + HEADER_BYTES);
  for (let k = 0; k < rows * cols; k++) {
    data[k] = flag === 0 ? view.getFloat32(k * 4, true) : view.getFloat64(k * 8, true);
  }
  return { rows, cols, dtype, data };
}

export async function writeEmb1(
  path: string,
  vectors: ArrayLike<number>[],
  dtype: Emb1Dtype = 'f64',
): Promise<void> {
  const payload = encodeEmb1(vectors, dtype);
  const tmp = `${path}.tmp.${process.pid}`;
  await fs.writeFile(tmp, payload);
  await fs.rename(tmp, path);
}

export async function readEmb1(path: string): Promise<Emb1Matrix> {
  return decodeEmb1(await fs.readFile(path));
}
