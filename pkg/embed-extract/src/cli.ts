#!/usr/bin/env node
/**
 * embed-extract: turn a manifest of captions or files into an EMB1 matrix.
 *
 *   embed-extract --manifest captions.txt --encoder hash-text --out t.emb1
 */

import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';
import { availableEncoders } from './encoders.js';
import { extract } from './extract.js';

export async function main(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .scriptName('embed-extract')
    .option('manifest', {
      type: 'string',
      demandOption: true,
      describe: 'UTF-8 manifest, one caption or file path per line',
    })
    .option('encoder', {
      type: 'string',
      default: 'hash-text',
      choices: availableEncoders(),
      describe: 'embedding encoder',
    })
    .option('out', {
      type: 'string',
      demandOption: true,
      describe: 'output EMB1 path',
    })
    .option('batch-size', { type: 'number', default: 64 })
    .option('dtype', {
      type: 'string',
      default: 'f64',
      choices: ['f32', 'f64'] as const,
    })
    .strict()
    .help()
    .parse();

  try {
    const result = await extract({
      manifestPath: args.manifest,
      encoder: args.encoder,
      outputPath: args.out,
      batchSize: args['batch-size'],
      dtype: args.dtype as 'f32' | 'f64',
    });
    process.stdout.write(
      `${JSON.stringify({
        rows: result.rows,
        dimension: result.dimension,
        out: result.outputPath,
      })}\n`,
    );
    return 0;
  } catch (error) {
    process.stderr.write(
      `${JSON.stringify({ error: { message: (error as Error).message } })}\n`,
    );
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
