/** Local tfjs model loading and patch-level saliency extraction. */

import * as fs from "node:fs";
import * as path from "node:path";

import * as tf from "@tensorflow/tfjs";

export type SaliencyMode = "features" | "direct";

const MODEL_JSON = "model.json";
const WEIGHTS_BIN = "weights.bin";

/**
 * Filesystem IOHandler so models save/load without a bundled node backend.
 * Layout: <dir>/model.json (topology + weight specs) and <dir>/weights.bin.
 */
export function fileSystemIO(dir: string): tf.io.IOHandler {
  return {
    async save(artifacts: tf.io.ModelArtifacts): Promise<tf.io.SaveResult> {
      fs.mkdirSync(dir, { recursive: true });
      const manifest = {
        format: "layers-model",
        modelTopology: artifacts.modelTopology,
        weightSpecs: artifacts.weightSpecs,
      };
      fs.writeFileSync(path.join(dir, MODEL_JSON), JSON.stringify(manifest));
      fs.writeFileSync(
        path.join(dir, WEIGHTS_BIN),
        Buffer.from(artifacts.weightData as ArrayBuffer),
      );
      return {
        modelArtifactsInfo: {
          dateSaved: new Date(),
          modelTopologyType: "JSON",
        },
      };
    },
    async load(): Promise<tf.io.ModelArtifacts> {
      const jsonPath = path.join(dir, MODEL_JSON);
      if (!fs.existsSync(jsonPath)) {
        throw new Error(
          `no tfjs model at ${jsonPath}; pass --model a directory holding ` +
            `model.json + weights.bin (export one with tf.LayersModel.save ` +
            `or the tensorflowjs converter)`,
        );
      }
      const manifest = JSON.parse(fs.readFileSync(jsonPath, "utf8"));
      const weights = fs.readFileSync(path.join(dir, WEIGHTS_BIN));
      return {
        modelTopology: manifest.modelTopology,
        weightSpecs: manifest.weightSpecs,
        weightData: weights.buffer.slice(
          weights.byteOffset,
          weights.byteOffset + weights.byteLength,
        ),
      };
    },
  };
}

export async function loadModel(dir: string): Promise<tf.LayersModel> {
  return tf.loadLayersModel(fileSystemIO(dir));
}

/**
 * Runs the model on a [1, S, S, 1] input and reduces its output to a 2-D
 * patch-saliency grid.
 *
 * "features": output [1, h, w, c] -> mean |activation| over channels.
 * "direct":   output already a single-channel grid; squeezed to [h, w].
 */
export function patchSaliency(
  model: tf.LayersModel,
  input: tf.Tensor4D,
  mode: SaliencyMode,
): tf.Tensor2D {
  return tf.tidy(() => {
    const out = model.predict(input) as tf.Tensor;
    if (out.rank !== 4) {
      throw new Error(
        `model output must be rank 4 [1, h, w, c], got rank ${out.rank}`,
      );
    }
    const [, h, w, c] = out.shape as [number, number, number, number];
    if (mode === "direct" && c !== 1) {
      throw new Error(`direct mode expects a single-channel output, got ${c}`);
    }
    const grid =
      mode === "features" ? out.abs().mean(3) : out.squeeze([3]);
    return grid.reshape([h, w]) as tf.Tensor2D;
  });
}
