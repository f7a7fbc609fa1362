/**
 * The export pipeline: read an A2XD dataset, run a checkpoint over it in
 * batches, and write the features as an A2XE embeddings file. Rows come
 * out in dataset order with labels copied through, and a rerun with the
 * same config is byte-identical.
 */

import * as tf from '@tensorflow/tfjs';

import { Dataset, ValidationError, readDataset, writeEmbeddings } from './format.js';
import { FeatureLayer, featureModel, loadCheckpoint } from './model.js';

export interface ExportConfig {
  datasetPath: string;
  checkpointPath: string;
  outPath: string;
  /** feature tap; the layer feeding the head by default */
  layer?: FeatureLayer;
  batchSize?: number;
  /** tf backend name; pure-JS 'cpu' by default */
  device?: string;
  /** divide u8 pixels by 255 before the model's own preprocessing */
  normalize?: boolean;
}

export interface ExportSummary {
  n: number;
  dim: number;
  numClasses: number;
}

function checkInputShape(model: tf.LayersModel, ds: Dataset): void {
  const shape = model.inputs[0].shape; // [null, C, H, W]
  const expected = [ds.channels, ds.height, ds.width];
  const got = shape.slice(1);
  if (got.length !== 3 || got.some((v, i) => v !== null && v !== expected[i])) {
    throw new ValidationError(
      `model expects input shape [${got.join(', ')}], dataset is [${expected.join(', ')}]`,
    );
  }
}

export async function exportEmbeddings(cfg: ExportConfig): Promise<ExportSummary> {
  const batchSize = cfg.batchSize ?? 256;
  if (batchSize < 1) {
    throw new ValidationError(`batch size must be >= 1, got ${batchSize}`);
  }
  const device = cfg.device ?? 'cpu';
  if (!(await tf.setBackend(device))) {
    throw new ValidationError(`unknown device ${JSON.stringify(device)}`);
  }
  await tf.ready();

  const ds = readDataset(cfg.datasetPath);
  if (ds.n === 0) {
    throw new ValidationError('cannot export embeddings for an empty dataset');
  }
  const model = await loadCheckpoint(cfg.checkpointPath);
  checkInputShape(model, ds);
  const extractor = featureModel(model, cfg.layer ?? 'penultimate');

  const sampleSize = ds.channels * ds.height * ds.width;
  let vectors: Float32Array | null = null;
  let dim = 0;
  for (let start = 0; start < ds.n; start += batchSize) {
    const count = Math.min(batchSize, ds.n - start);
    const slice = ds.pixels.subarray(start * sampleSize, (start + count) * sampleSize);
    const batch = tf.tidy(() => {
      let x = tf.tensor4d(
        Float32Array.from(slice),
        [count, ds.channels, ds.height, ds.width],
      );
      if (cfg.normalize ?? true) {
        x = x.div(255);
      }
      const features = extractor.predict(x, { batchSize: count }) as tf.Tensor;
      return features.reshape([count, -1]);
    });
    const data = (await batch.data()) as Float32Array;
    batch.dispose();
    if (vectors === null) {
      dim = data.length / count;
      if (!Number.isInteger(dim) || dim < 1) {
        throw new ValidationError(`model produced an empty feature vector (dim ${dim})`);
      }
      vectors = new Float32Array(ds.n * dim);
    }
    for (let i = 0; i < data.length; i++) {
      if (!Number.isFinite(data[i])) {
        throw new ValidationError(`non-finite activation in rows ${start}..${start + count - 1}`);
      }
    }
    vectors.set(data, start * dim);
  }

  writeEmbeddings(cfg.outPath, {
    n: ds.n,
    dim,
    numClasses: ds.numClasses,
    labels: ds.labels,
    vectors: vectors!,
  });
  return { n: ds.n, dim, numClasses: ds.numClasses };
}
