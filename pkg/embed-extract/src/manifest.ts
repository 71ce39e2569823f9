/**
 * Manifest handling: a UTF-8 text file with one item per line.
 *
 * An item is either a caption string or a file path, depending on the
 * encoder. The output row order always equals the manifest order, because
 * downstream pairing is positional.
 */

import { promises as fs } from 'fs';

export async function readManifest(path: string): Promise<string[]> {
  const text = await fs.readFile(path, 'utf-8');
  const items = text
    .split(/\r?\n/)
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
  if (items.length === 0) {
    throw new Error(`manifest ${path} is empty`);
  }
  return items;
}
