#!/usr/bin/env node
/**
 * export --dataset D.a2xd --checkpoint CKPT --out E.a2xe
 *        [--layer penultimate|logits] [--batch 256] [--device cpu]
 *        [--no-normalize]
 */

import { exportEmbeddings } from './export.js';
import { FormatError, ValidationError } from './format.js';
import { CheckpointError } from './model.js';

const USAGE =
  'usage: a2x-export --dataset D.a2xd --checkpoint CKPT --out E.a2xe ' +
  '[--layer penultimate|logits] [--batch N] [--device NAME] [--no-normalize]';

function parseArgs(argv: string[]) {
  const args = argv[0] === 'export' ? argv.slice(1) : argv.slice();
  const opts: Record<string, string | boolean> = {};
  for (let i = 0; i < args.length; i++) {
    const arg = args[i];
    if (arg === '--no-normalize') {
      opts.noNormalize = true;
    } else if (arg === '--help' || arg === '-h') {
      opts.help = true;
    } else if (arg.startsWith('--')) {
      const value = args[i + 1];
      if (value === undefined) {
        throw new ValidationError(`missing value for ${arg}`);
      }
      opts[arg.slice(2)] = value;
      i++;
    } else {
      throw new ValidationError(`unexpected argument ${JSON.stringify(arg)}`);
    }
  }
  return opts;
}

async function main(): Promise<number> {
  let opts: Record<string, string | boolean>;
  try {
    opts = parseArgs(process.argv.slice(2));
  } catch (err) {
    console.error(`error: ${(err as Error).message}\n${USAGE}`);
    return 2;
  }
  if (opts.help) {
    console.log(USAGE);
    return 0;
  }
  for (const required of ['dataset', 'checkpoint', 'out']) {
    if (typeof opts[required] !== 'string') {
      console.error(`error: --${required} is required\n${USAGE}`);
      return 2;
    }
  }
  const layer = (opts.layer as string) ?? 'penultimate';
  if (layer !== 'penultimate' && layer !== 'logits') {
    console.error(`error: --layer must be penultimate or logits, got ${layer}`);
    return 2;
  }
  try {
    const summary = await exportEmbeddings({
      datasetPath: opts.dataset as string,
      checkpointPath: opts.checkpoint as string,
      outPath: opts.out as string,
      layer,
      batchSize: opts.batch ? Number(opts.batch) : undefined,
      device: opts.device as string | undefined,
      normalize: !opts.noNormalize,
    });
    console.log(`n=${summary.n}`);
    console.log(`dim=${summary.dim}`);
    console.log(`num_classes=${summary.numClasses}`);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    if (err instanceof ValidationError || err instanceof FormatError) return 2;
    if (err instanceof CheckpointError) return 2;
    if ((err as NodeJS.ErrnoException).code) return 4;
    throw err;
  }
}

main().then((code) => {
  process.exitCode = code;
});
