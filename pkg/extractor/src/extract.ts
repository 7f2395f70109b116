/** Frame -> model -> patch saliency -> block attention map pipeline. */

import * as tf from "@tensorflow/tfjs";

import { AttentionMapFile, FORMAT_VERSION } from "./attn-json.js";
import { SaliencyMode, patchSaliency } from "./model.js";
import type { GrayFrame } from "./y4m.js";

export interface ExtractorConfig {
  mode: SaliencyMode;
  blockSize: number;
  resizeEdge: number;
  source: string;
}

export const DEFAULT_CONFIG: ExtractorConfig = {
  mode: "features",
  blockSize: 16,
  resizeEdge: 224,
  source: "vit",
};

/**
 * Min-max normalization into [0, 1]; a constant grid maps to all 0.5 so a
 * featureless frame stays neutral instead of dividing by zero.
 */
export function minMaxNormalize(values: Float32Array): Float32Array {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  const out = new Float32Array(values.length);
  if (hi <= lo) {
    out.fill(0.5);
    return out;
  }
  const span = hi - lo;
  for (let i = 0; i < values.length; i++) {
    out[i] = (values[i] - lo) / span;
  }
  return out;
}

/**
 * Mean over each b x b block of a pixel grid; remainder rows/columns beyond
 * the last full block are excluded, matching the motion-estimation tiling.
 */
export function aggregateToBlocks(
  pixels: Float32Array,
  width: number,
  height: number,
  blockSize: number,
): { cols: number; rows: number; scores: number[] } {
  const cols = Math.floor(width / blockSize);
  const rows = Math.floor(height / blockSize);
  if (cols < 1 || rows < 1) {
    throw new Error(
      `frame ${width}x${height} smaller than one ${blockSize}x${blockSize} block`,
    );
  }
  const scores = new Array<number>(cols * rows);
  for (let br = 0; br < rows; br++) {
    for (let bc = 0; bc < cols; bc++) {
      let sum = 0;
      for (let y = br * blockSize; y < (br + 1) * blockSize; y++) {
        const base = y * width + bc * blockSize;
        for (let x = 0; x < blockSize; x++) {
          sum += pixels[base + x];
        }
      }
      const mean = sum / (blockSize * blockSize);
      scores[br * cols + bc] = Math.min(1, Math.max(0, mean));
    }
  }
  return { cols, rows, scores };
}

/**
 * One frame through the protocol: resize to the model edge, run the model,
 * min-max normalize the patch saliency, resample to the original dims and
 * mean-pool over blocks.
 */
export function extractFrame(
  model: tf.LayersModel,
  frame: GrayFrame,
  frameIndex: number,
  config: ExtractorConfig = DEFAULT_CONFIG,
): AttentionMapFile {
  const resampled = tf.tidy(() => {
    const image = tf
      .tensor3d(frame.data, [frame.height, frame.width, 1], "float32")
      .div(255);
    const resized = tf.image.resizeBilinear(
      image as tf.Tensor3D,
      [config.resizeEdge, config.resizeEdge],
    );
    const saliency = patchSaliency(
      model,
      resized.expandDims(0) as tf.Tensor4D,
      config.mode,
    );
    const grid = minMaxNormalize(saliency.dataSync() as Float32Array);
    const [h, w] = saliency.shape;
    const back = tf.image.resizeBilinear(
      tf.tensor3d(grid, [h, w, 1]),
      [frame.height, frame.width],
    );
    return back.dataSync() as Float32Array;
  });
  const { cols, rows, scores } = aggregateToBlocks(
    resampled,
    frame.width,
    frame.height,
    config.blockSize,
  );
  return {
    format_version: FORMAT_VERSION,
    block_size: config.blockSize,
    cols,
    rows,
    source: config.source,
    frame_index: frameIndex,
    scores,
  };
}
