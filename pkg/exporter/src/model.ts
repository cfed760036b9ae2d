/** Model loading and intermediate-activation extraction.
 *
 * Models are tfjs LayersModel directories (model.json + weight binaries).
 * Pure-JS tfjs has no filesystem IO handlers in Node, so a small handler
 * reads the artifacts directly. Named models resolve through a registry of
 * URLs and are fetched by tfjs itself; local paths work offline.
 */

import * as fs from "fs";
import * as path from "path";

import * as tf from "@tensorflow/tfjs";

import { LayerNotFoundError, ModelUnavailableError } from "./errors.js";

/** Known pretrained models reachable when the machine has network access. */
export const MODEL_REGISTRY: Record<string, string> = {
  mobilenet_v1:
    "https://storage.googleapis.com/tfjs-models/tfjs/mobilenet_v1_0.25_224/model.json",
};

function fileSystemLoadHandler(dir: string): tf.io.IOHandler {
  return {
    load: async () => {
      const modelJsonPath = path.join(dir, "model.json");
      const modelJson = JSON.parse(fs.readFileSync(modelJsonPath, "utf-8"));
      const manifest = modelJson.weightsManifest ?? [];
      const weightSpecs: tf.io.WeightsManifestEntry[] = [];
      const buffers: Buffer[] = [];
      for (const group of manifest) {
        for (const relative of group.paths) {
          buffers.push(fs.readFileSync(path.join(dir, relative)));
        }
        weightSpecs.push(...group.weights);
      }
      const concatenated = Buffer.concat(buffers);
      const weightData = concatenated.buffer.slice(
        concatenated.byteOffset,
        concatenated.byteOffset + concatenated.byteLength,
      );
      return {
        modelTopology: modelJson.modelTopology,
        format: modelJson.format,
        generatedBy: modelJson.generatedBy,
        weightSpecs,
        weightData,
      };
    },
  };
}

/** Save a LayersModel as model.json + weights.bin (test fixtures use this). */
export function fileSystemSaveHandler(dir: string): tf.io.IOHandler {
  return tf.io.withSaveHandler(async (artifacts) => {
    fs.mkdirSync(dir, { recursive: true });
    const weightsManifest = [{ paths: ["weights.bin"], weights: artifacts.weightSpecs }];
    const modelJson = {
      modelTopology: artifacts.modelTopology,
      format: artifacts.format,
      generatedBy: artifacts.generatedBy,
      convertedBy: null,
      weightsManifest,
    };
    fs.writeFileSync(path.join(dir, "model.json"), JSON.stringify(modelJson));
    fs.writeFileSync(path.join(dir, "weights.bin"), Buffer.from(artifacts.weightData as ArrayBuffer));
    return { modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: "JSON" } };
  });
}

export async function loadModel(modelName: string): Promise<tf.LayersModel> {
  await tf.setBackend("cpu");
  const source = MODEL_REGISTRY[modelName] ?? modelName;
  try {
    if (/^https?:\/\//.test(source)) {
      return await tf.loadLayersModel(source);
    }
    const dir = source.endsWith("model.json") ? path.dirname(source) : source;
    if (!fs.existsSync(path.join(dir, "model.json"))) {
      throw new ModelUnavailableError(`no model.json under ${dir}`);
    }
    return await tf.loadLayersModel(fileSystemLoadHandler(dir));
  } catch (err) {
    if (err instanceof ModelUnavailableError) throw err;
    throw new ModelUnavailableError(`cannot load model ${modelName}: ${String(err)}`);
  }
}

/** Sub-model emitting the named layer's activations. */
export function tapLayer(model: tf.LayersModel, layerName: string): tf.LayersModel {
  let layer: tf.layers.Layer;
  try {
    layer = model.getLayer(layerName);
  } catch {
    const known = model.layers.map((l) => l.name).join(", ");
    throw new LayerNotFoundError(`layer ${layerName} not found; model has: ${known}`);
  }
  return tf.model({ inputs: model.inputs, outputs: layer.output as tf.SymbolicTensor });
}

export interface ActivationMap {
  values: Float32Array;
  height: number;
  width: number;
  channels: number;
}

/** Run one image (h x w x c tensor data) through the tapped model. */
export function activationsFor(
  tapped: tf.LayersModel,
  pixels: Float32Array,
  height: number,
  width: number,
  channels: number,
): ActivationMap {
  return tf.tidy(() => {
    const input = tf.tensor4d(pixels, [1, height, width, channels]);
    const output = tapped.predict(input) as tf.Tensor;
    const shape = output.shape;
    let h = 1;
    let w = 1;
    let c = 1;
    if (shape.length === 4) {
      [, h, w, c] = shape as [number, number, number, number];
    } else if (shape.length === 2) {
      c = shape[1];
    } else {
      throw new ModelUnavailableError(`unsupported activation rank ${shape.length}`);
    }
    const values = output.dataSync() as Float32Array;
    return { values: Float32Array.from(values), height: h, width: w, channels: c };
  });
}
