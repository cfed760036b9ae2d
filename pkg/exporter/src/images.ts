/** PNG loading and resizing to a model's input geometry. */

import * as fs from "fs";

import { PNG } from "pngjs";

import { ModelUnavailableError } from "./errors.js";

export interface InputGeometry {
  height: number;
  width: number;
  channels: number;
}

/**
 * Decode a PNG and return h x w x c float32 pixels in [0, 1], resized with
 * nearest-neighbor sampling. Grayscale inputs (channels = 1) use luma
 * weights; RGB inputs replicate gray sources across channels.
 */
export function loadImage(filePath: string, geometry: InputGeometry): Float32Array {
  let png: PNG;
  try {
    png = PNG.sync.read(fs.readFileSync(filePath));
  } catch (err) {
    throw new ModelUnavailableError(`cannot decode image ${filePath}: ${String(err)}`);
  }
  const { height, width, channels } = geometry;
  const out = new Float32Array(height * width * channels);
  for (let y = 0; y < height; y++) {
    const sy = Math.min(png.height - 1, Math.floor((y * png.height) / height));
    for (let x = 0; x < width; x++) {
      const sx = Math.min(png.width - 1, Math.floor((x * png.width) / width));
      const src = (sy * png.width + sx) * 4;
      const r = png.data[src] / 255;
      const g = png.data[src + 1] / 255;
      const b = png.data[src + 2] / 255;
      const base = (y * width + x) * channels;
      if (channels === 1) {
        out[base] = 0.299 * r + 0.587 * g + 0.114 * b;
      } else if (channels === 3) {
        out[base] = r;
        out[base + 1] = g;
        out[base + 2] = b;
      } else {
        throw new ModelUnavailableError(`unsupported input channel count ${channels}`);
      }
    }
  }
  return out;
}

/** Read an image-list file: one path per line, blank lines ignored. */
export function readImageList(listPath: string): string[] {
  const lines = fs
    .readFileSync(listPath, "utf-8")
    .split(/\r?\n/)
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new ModelUnavailableError(`image list ${listPath} is empty`);
  }
  return lines;
}
