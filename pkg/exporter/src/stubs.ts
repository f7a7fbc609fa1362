/**
 * Model builders for tests and smoke runs. All take channel-first
 * [C, H, W] inputs, matching the dataset pixel layout, so a flatten-only
 * model reproduces the pixel storage order exactly.
 */

import * as tf from '@tensorflow/tfjs';

/** Flatten-only stub: features are the (normalized) pixels themselves. */
export function identityModel(channels: number, height: number, width: number): tf.LayersModel {
  return tf.sequential({
    layers: [tf.layers.flatten({ inputShape: [channels, height, width] })],
  });
}

/** Stub whose logits are a constant vector regardless of the input. */
export function constantModel(
  channels: number,
  height: number,
  width: number,
  dim: number,
  value: number,
): tf.LayersModel {
  const model = tf.sequential({
    layers: [
      tf.layers.flatten({ inputShape: [channels, height, width] }),
      tf.layers.dense({
        units: dim,
        kernelInitializer: 'zeros',
        biasInitializer: tf.initializers.constant({ value }),
      }),
    ],
  });
  return model;
}

function convBn(x: tf.SymbolicTensor, filters: number, stride: number): tf.SymbolicTensor {
  const conv = tf.layers.conv2d({
    filters,
    kernelSize: 3,
    strides: stride,
    padding: 'same',
    useBias: false,
    kernelInitializer: 'heNormal',
  });
  const bn = tf.layers.batchNormalization();
  return bn.apply(conv.apply(x)) as tf.SymbolicTensor;
}

function basicBlock(x: tf.SymbolicTensor, filters: number, stride: number): tf.SymbolicTensor {
  let out = convBn(x, filters, stride);
  out = tf.layers.reLU().apply(out) as tf.SymbolicTensor;
  out = convBn(out, filters, 1);
  let shortcut = x;
  if (stride !== 1 || (x.shape[x.shape.length - 1] as number) !== filters) {
    const proj = tf.layers.conv2d({
      filters,
      kernelSize: 1,
      strides: stride,
      padding: 'same',
      useBias: false,
      kernelInitializer: 'heNormal',
    });
    shortcut = tf.layers.batchNormalization().apply(proj.apply(x)) as tf.SymbolicTensor;
  }
  const sum = tf.layers.add().apply([out, shortcut]) as tf.SymbolicTensor;
  return tf.layers.reLU().apply(sum) as tf.SymbolicTensor;
}

/**
 * The classic 18-layer residual classifier (4 stages of 2 basic blocks,
 * widths 64/128/256/512, global average pooling, dense head), adapted to
 * channel-first inputs via an initial permute. The penultimate width is
 * 512 regardless of the input resolution.
 */
export function resnet18(
  channels: number,
  height: number,
  width: number,
  numClasses: number,
): tf.LayersModel {
  const input = tf.input({ shape: [channels, height, width] });
  let x = tf.layers.permute({ dims: [2, 3, 1] }).apply(input) as tf.SymbolicTensor;
  x = convBn(x, 64, 1);
  x = tf.layers.reLU().apply(x) as tf.SymbolicTensor;
  const widths = [64, 128, 256, 512];
  widths.forEach((w, stage) => {
    x = basicBlock(x, w, stage === 0 ? 1 : 2);
    x = basicBlock(x, w, 1);
  });
  x = tf.layers.globalAveragePooling2d({}).apply(x) as tf.SymbolicTensor;
  const logits = tf.layers
    .dense({ units: numClasses, kernelInitializer: 'heNormal' })
    .apply(x) as tf.SymbolicTensor;
  return tf.model({ inputs: input, outputs: logits });
}
