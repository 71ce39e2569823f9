/**
 * Pluggable embedding encoders.
 *
 * Two deterministic, dependency-free encoders ship by default:
 *
 * - `hash-text`: character-trigram feature hashing for caption strings,
 *   L2-normalized. A fixed hash means identical captions always map to
 *   identical rows, and no model weights are needed.
 * - `byte-histogram`: a normalized byte-value histogram of a file's
 *   contents, usable for any binary input (e.g. images) without decoders.
 *
 * Model-backed encoders (CLIP, DINOv2, ...) plug in through the same
 * interface: implement `encodeBatch` and register the instance. Inference
 * must be deterministic (no dropout, fixed preprocessing) so scores are
 * reproducible.
 */

import { promises as fs } from 'fs';

export interface Encoder {
  readonly name: string;
  readonly dimension: number;
  /** Embed a batch of manifest items; output[i] corresponds to items[i]. */
  encodeBatch(items: string[]): Promise<Float64Array[]>;
}

function l2Normalize(vector: Float64Array): Float64Array {
  let sumSq = 0;
  for (const v of vector) sumSq += v * v;
  const norm = Math.sqrt(sumSq);
  if (norm > 0) {
    for (let i = 0; i < vector.length; i++) vector[i] /= norm;
  }
  return vector;
}

/** FNV-1a 32-bit hash, the bucket/sign hash for feature hashing. */
function fnv1a(text: string, seed: number): number {
  let hash = (0x811c9dc5 ^ seed) >>> 0;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

export class HashTextEncoder implements Encoder {
  readonly name = 'hash-text';
  readonly dimension: number;

  constructor(dimension = 256) {
    if (dimension < 2) throw new Error('hash-text dimension must be >= 2');
    this.dimension = dimension;
  }

  encode(text: string): Float64Array {
    const vector = new Float64Array(this.dimension);
    const padded = `${text.toLowerCase()}`;
    const width = Math.min(3, padded.length);
    for (let i = 0; i + width <= padded.length; i++) {
      const gram = padded.slice(i, i + width);
      const bucket = fnv1a(gram, 0) % this.dimension;
      const sign = fnv1a(gram, 0x9747b28c) & 1 ? 1 : -1;
      vector[bucket] += sign;
    }
    return l2Normalize(vector);
  }

  async encodeBatch(items: string[]): Promise<Float64Array[]> {
    return items.map((item) => this.encode(item));
  }
}

export class ByteHistogramEncoder implements Encoder {
  readonly name = 'byte-histogram';
  readonly dimension = 256;

  async encodeBatch(items: string[]): Promise<Float64Array[]> {
    const out: Float64Array[] = [];
    for (let i = 0; i < items.length; i++) {
      let raw: Buffer;
      try {
        raw = await fs.readFile(items[i]);
      } catch (error) {
        throw new Error(
          `manifest item ${i} (${items[i]}): ${(error as Error).message}`,
        );
      }
      const vector = new Float64Array(this.dimension);
      for (const byte of raw) vector[byte] += 1;
      out.push(l2Normalize(vector));
    }
    return out;
  }
}

const REGISTRY = new Map<string, () => Encoder>([
  ['hash-text', () => new HashTextEncoder()],
  ['byte-histogram', () => new ByteHistogramEncoder()],
]);

export function registerEncoder(name: string, factory: () => Encoder): void {
  REGISTRY.set(name, factory);
}

export function createEncoder(name: string): Encoder {
  const factory = REGISTRY.get(name);
  if (!factory) {
    const known = [...REGISTRY.keys()].join(', ');
    throw new Error(`unknown encoder '${name}' (available: ${known})`);
  }
  return factory();
}

export function availableEncoders(): string[] {
  return [...REGISTRY.keys()];
}
