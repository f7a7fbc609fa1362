/**
 * Checkpoint handling for layers models on plain files (no tfjs-node):
 * a checkpoint is a directory holding model.json plus binary weight
 * shards, the standard layers-model layout. Also builds the feature
 * extractor for a chosen tap point.
 */

import * as tf from '@tensorflow/tfjs';
import { existsSync, mkdirSync, readFileSync, writeFileSync } from 'fs';
import { dirname, join } from 'path';

export class CheckpointError extends Error {}

export type FeatureLayer = 'penultimate' | 'logits';

function fileSaveHandler(dir: string): tf.io.IOHandler {
  return {
    async save(artifacts: tf.io.ModelArtifacts): Promise<tf.io.SaveResult> {
      mkdirSync(dir, { recursive: true });
      const weightsManifest = [
        { paths: ['weights.bin'], weights: artifacts.weightSpecs ?? [] },
      ];
      const modelJson = {
        modelTopology: artifacts.modelTopology,
        format: 'layers-model',
        generatedBy: 'a2x-embed-export',
        convertedBy: null,
        weightsManifest,
      };
      writeFileSync(join(dir, 'model.json'), JSON.stringify(modelJson));
      const weightData = artifacts.weightData as ArrayBuffer;
      writeFileSync(join(dir, 'weights.bin'), Buffer.from(weightData));
      return {
        modelArtifactsInfo: {
          dateSaved: new Date(),
          modelTopologyType: 'JSON',
        },
      };
    },
  };
}

function fileLoadHandler(checkpointPath: string): tf.io.IOHandler {
  return {
    async load(): Promise<tf.io.ModelArtifacts> {
      const modelJsonPath = checkpointPath.endsWith('model.json')
        ? checkpointPath
        : join(checkpointPath, 'model.json');
      if (!existsSync(modelJsonPath)) {
        throw new CheckpointError(`no model.json under ${checkpointPath}`);
      }
      let doc: any;
      try {
        doc = JSON.parse(readFileSync(modelJsonPath, 'utf-8'));
      } catch (err) {
        throw new CheckpointError(`unreadable checkpoint: ${err}`);
      }
      const dir = dirname(modelJsonPath);
      const weightSpecs: tf.io.WeightsManifestEntry[] = [];
      const shards: Buffer[] = [];
      for (const group of doc.weightsManifest ?? []) {
        weightSpecs.push(...group.weights);
        for (const p of group.paths) {
          shards.push(readFileSync(join(dir, p)));
        }
      }
      const weightData = Buffer.concat(shards);
      return {
        modelTopology: doc.modelTopology,
        weightSpecs,
        weightData: weightData.buffer.slice(
          weightData.byteOffset,
          weightData.byteOffset + weightData.byteLength,
        ),
      };
    },
  };
}

export async function saveCheckpoint(model: tf.LayersModel, dir: string): Promise<void> {
  await model.save(fileSaveHandler(dir));
}

export async function loadCheckpoint(path: string): Promise<tf.LayersModel> {
  try {
    return await tf.loadLayersModel(fileLoadHandler(path));
  } catch (err) {
    if (err instanceof CheckpointError) throw err;
    throw new CheckpointError(`failed to load checkpoint ${path}: ${err}`);
  }
}

/**
 * Model tapping the requested features: the checkpoint's own outputs for
 * 'logits', or the tensor feeding its final layer for 'penultimate'. A
 * single-layer model degenerates to its input, i.e. the (normalized)
 * pixels themselves.
 */
export function featureModel(model: tf.LayersModel, layer: FeatureLayer): tf.LayersModel {
  if (layer === 'logits') {
    return model;
  }
  const layers = model.layers.filter((l) => l.getClassName() !== 'InputLayer');
  if (layers.length === 0) {
    return model;
  }
  const last = layers[layers.length - 1];
  const input = last.input;
  if (Array.isArray(input)) {
    throw new CheckpointError('penultimate features undefined: final layer has multiple inputs');
  }
  return tf.model({ inputs: model.inputs, outputs: input });
}
