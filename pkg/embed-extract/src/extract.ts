/**
 * Extraction job: manifest in, EMB1 file out, row i embedding item i.
 */

import { createEncoder, Encoder } from './encoders.js';
import { Emb1Dtype, writeEmb1 } from './emb1.js';
import { readManifest } from './manifest.js';

export interface ExtractionJob {
  /** Path to a UTF-8 manifest, one item per line. */
  manifestPath: string;
  /** Registered encoder name, or a ready Encoder instance. */
  encoder: string | Encoder;
  outputPath: string;
  batchSize?: number;
  dtype?: Emb1Dtype;
  /** Accepted for API parity with GPU-backed encoders; unused here. */
  deviceHint?: string;
}

export interface ExtractionResult {
  rows: number;
  dimension: number;
  outputPath: string;
}

export async function extract(job: ExtractionJob): Promise<ExtractionResult> {
  const encoder =
    typeof job.encoder === 'string' ? createEncoder(job.encoder) : job.encoder;
  const batchSize = job.batchSize ?? 64;
  if (batchSize < 1) {
    throw new Error(`batch size must be >= 1, got ${batchSize}`);
  }
  const items = await readManifest(job.manifestPath);

  const vectors: Float64Array[] = [];
  for (let start = 0; start < items.length; start += batchSize) {
    const batch = items.slice(start, start + batchSize);
    const encoded = await encoder.encodeBatch(batch);
    if (encoded.length !== batch.length) {
      throw new Error(
        `encoder returned ${encoded.length} rows for a batch of ${batch.length}`,
      );
    }
    for (const row of encoded) {
      if (row.length !== encoder.dimension) {
        throw new Error(
          `encoder row has ${row.length} values, expected ${encoder.dimension}`,
        );
      }
      vectors.push(row);
    }
  }

  await writeEmb1(job.outputPath, vectors, job.dtype ?? 'f64');
  return {
    rows: vectors.length,
    dimension: encoder.dimension,
    outputPath: job.outputPath,
  };
}
