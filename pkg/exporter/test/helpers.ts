import * as fs from "fs";
import * as path from "path";

import * as tf from "@tensorflow/tfjs";
import { PNG } from "pngjs";

import { fileSystemSaveHandler } from "../src/model.js";
import { SeededRng } from "../src/random.js";

/** Build a tiny two-conv model with seeded weights and save it to dir. */
export async function makeTinyModel(dir: string, inputSize = 12, channels = 1): Promise<void> {
  await tf.setBackend("cpu");
  const model = tf.sequential();
  model.add(
    tf.layers.conv2d({
      inputShape: [inputSize, inputSize, channels],
      filters: 4,
      kernelSize: 3,
      activation: "relu",
      name: "conv1",
    }),
  );
  model.add(
    tf.layers.conv2d({ filters: 6, kernelSize: 3, activation: "relu", name: "conv2" }),
  );
  const rng = new SeededRng(99);
  model.setWeights(
    model.getWeights().map((w) => {
      const values = new Float32Array(w.size);
      for (let i = 0; i < values.length; i++) {
        values[i] = rng.nextGaussian() * 0.5;
      }
      return tf.tensor(values, w.shape);
    }),
  );
  await model.save(fileSystemSaveHandler(dir));
  model.dispose();
}

/** Deterministic little RGBA PNG. */
export function writePng(filePath: string, width: number, height: number, seed: number): void {
  const rng = new SeededRng(seed);
  const png = new PNG({ width, height });
  for (let i = 0; i < width * height; i++) {
    png.data[i * 4] = Math.floor(rng.nextUniform() * 256);
    png.data[i * 4 + 1] = Math.floor(rng.nextUniform() * 256);
    png.data[i * 4 + 2] = Math.floor(rng.nextUniform() * 256);
    png.data[i * 4 + 3] = 255;
  }
  fs.mkdirSync(path.dirname(filePath), { recursive: true });
  fs.writeFileSync(filePath, PNG.sync.write(png));
}

/** Three PNGs plus an image-list file; returns the list path. */
export function makeImageList(dir: string, count = 3, size = 16): string {
  const paths: string[] = [];
  for (let i = 0; i < count; i++) {
    const p = path.join(dir, `img_${i}.png`);
    writePng(p, size, size, 1000 + i);
    paths.push(p);
  }
  const listPath = path.join(dir, "images.txt");
  fs.writeFileSync(listPath, paths.join("\n") + "\n");
  return listPath;
}
