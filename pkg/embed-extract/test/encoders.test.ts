import { mkdtemp, rm, writeFile } from 'fs/promises';
import { tmpdir } from 'os';
import { join } from 'path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import {
  ByteHistogramEncoder,
  HashTextEncoder,
  availableEncoders,
  createEncoder,
} from '../src/encoders.js';

function cosine(a: Float64Array, b: Float64Array): number {
  let dot = 0;
  let na = 0;
  let nb = 0;
  for (let i = 0; i < a.length; i++) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / Math.sqrt(na * nb);
}

let dir: string;
beforeAll(async () => {
  dir = await mkdtemp(join(tmpdir(), 'enc-'));
});
afterAll(async () => {
  await rm(dir, { recursive: true, force: true });
});

describe('hash-text encoder', () => {
  const encoder = new HashTextEncoder();

  it('is deterministic and unit-norm', async () => {
    const [a] = await encoder.encodeBatch(['a photo of a dog']);
    const [b] = await encoder.encodeBatch(['a photo of a dog']);
    expect([...a]).toEqual([...b]);
    const norm = Math.sqrt([...a].reduce((s, v) => s + v * v, 0));
    expect(norm).toBeCloseTo(1.0, 10);
  });

  it('separates unrelated captions', async () => {
    const [dog, plane] = await encoder.encodeBatch([
      'a photo of a dog',
      'an airplane on the runway',
    ]);
    expect(Math.abs(cosine(dog, plane))).toBeLessThan(0.9);
  });

  it('keeps similar captions closer than unrelated ones', async () => {
    const [a, b, c] = await encoder.encodeBatch([
      'a photo of a brown dog',
      'a photo of a black dog',
      'quantum chromodynamics lattice simulation',
    ]);
    expect(cosine(a, b)).toBeGreaterThan(cosine(a, c));
  });

  it('handles short strings', async () => {
    const rows = await encoder.encodeBatch(['x', '']);
    expect(rows).toHaveLength(2);
    expect(rows[0].length).toBe(encoder.dimension);
  });
});

describe('byte-histogram encoder', () => {
  it('embeds identical files identically', async () => {
    const encoder = new ByteHistogramEncoder();
    const pathA = join(dir, 'a.bin');
    const pathB = join(dir, 'b.bin');
    const payload = Buffer.from([0, 1, 2, 255, 255, 7]);
    await writeFile(pathA, payload);
    await writeFile(pathB, payload);
    const [a, b] = await encoder.encodeBatch([pathA, pathB]);
    expect([...a]).toEqual([...b]);
    expect(cosine(a, b)).toBeCloseTo(1.0, 12);
  });

  it('reports the failing manifest index for missing files', async () => {
    const encoder = new ByteHistogramEncoder();
    const ok = join(dir, 'ok.bin');
    await writeFile(ok, Buffer.from([1, 2, 3]));
    await expect(
      encoder.encodeBatch([ok, join(dir, 'missing.bin')]),
    ).rejects.toThrow(/item 1/);
  });
});

describe('registry', () => {
  it('lists and constructs the built-in encoders', () => {
    expect(availableEncoders()).toContain('hash-text');
    expect(availableEncoders()).toContain('byte-histogram');
    expect(createEncoder('hash-text').dimension).toBe(256);
  });

  it('rejects unknown names', () => {
    expect(() => createEncoder('clip-vit')).toThrow(/unknown encoder/);
  });
});
