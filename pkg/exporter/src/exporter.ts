/** End-to-end descriptor export: model -> layer activations -> postprocess
 * -> harness-format descriptor file.
 *
 * No similarity logic lives here; matching belongs to the benchmark harness.
 */

import * as path from "path";

import { BadSpecError } from "./errors.js";
import { loadImage, readImageList } from "./images.js";
import { activationsFor, loadModel, tapLayer } from "./model.js";
import { project, projectionMatrix } from "./projection.js";
import { pyramidDim, spatialPyramid } from "./pyramid.js";
import { writeDescriptorFile } from "./format.js";

export type Postprocess =
  | { kind: "none" }
  | { kind: "gaussian_projection"; dim: number; seed: number }
  | { kind: "spatial_pyramid"; levels: number[] };

export interface ExportSpec {
  modelName: string;
  layerName: string;
  postprocess: Postprocess;
  imageListPath: string;
  outputPath: string;
}

/** Parse 'none', 'gp:DIM:SEED', or 'spp:1,2' into a Postprocess. */
export function parsePostprocess(text: string): Postprocess {
  const trimmed = text.trim();
  if (trimmed === "none") return { kind: "none" };
  if (trimmed.startsWith("gp:")) {
    const parts = trimmed.split(":");
    if (parts.length !== 3) {
      throw new BadSpecError(`gaussian projection spec is gp:DIM:SEED, got ${text}`);
    }
    const dim = Number(parts[1]);
    const seed = Number(parts[2]);
    if (!Number.isInteger(dim) || dim < 1 || !Number.isInteger(seed) || seed < 0) {
      throw new BadSpecError(`bad projection dim/seed in ${text}`);
    }
    return { kind: "gaussian_projection", dim, seed };
  }
  if (trimmed.startsWith("spp:")) {
    const levels = trimmed
      .slice(4)
      .split(",")
      .map((p) => Number(p.trim()));
    if (levels.length === 0 || levels.some((l) => !Number.isInteger(l) || l < 1)) {
      throw new BadSpecError(`spatial pyramid spec is spp:L1,L2,..., got ${text}`);
    }
    return { kind: "spatial_pyramid", levels };
  }
  throw new BadSpecError(`unknown postprocess ${text}; use none, gp:DIM:SEED, or spp:1,2`);
}

/** Stable technique identity: model, layer, and postprocess (with its seed). */
export function techniqueId(spec: ExportSpec): string {
  const model = path.basename(spec.modelName).replace(/\.json$/, "");
  const pp = spec.postprocess;
  const tag =
    pp.kind === "none"
      ? "raw"
      : pp.kind === "gaussian_projection"
        ? `gp${pp.dim}s${pp.seed}`
        : `spp${pp.levels.join(".")}`;
  const full = `${model}-${spec.layerName}-${tag}`;
  // keep the discriminating suffix if a long model name overflows the field
  return full.length <= 64 ? full : full.slice(full.length - 64);
}

export interface ExportResult {
  outputPath: string;
  techniqueId: string;
  count: number;
  dim: number;
}

export async function exportDescriptors(spec: ExportSpec): Promise<ExportResult> {
  const imagePaths = readImageList(spec.imageListPath);
  if (new Set(imagePaths).size !== imagePaths.length) {
    throw new BadSpecError("image list repeats a path; manifest names must be unique");
  }
  const model = await loadModel(spec.modelName);
  const tapped = tapLayer(model, spec.layerName);
  const inputShape = model.inputs[0].shape;
  const geometry = {
    height: inputShape[1] as number,
    width: inputShape[2] as number,
    channels: inputShape[3] as number,
  };

  const pp = spec.postprocess;
  let dim = -1;
  let rows: Float32Array | null = null;
  let projection: Float64Array | null = null;

  for (let i = 0; i < imagePaths.length; i++) {
    const pixels = loadImage(imagePaths[i], geometry);
    const act = activationsFor(tapped, pixels, geometry.height, geometry.width, geometry.channels);
    let row: ArrayLike<number>;
    if (pp.kind === "none") {
      row = act.values;
    } else if (pp.kind === "gaussian_projection") {
      const inputDim = act.values.length;
      projection ??= projectionMatrix(pp.seed, inputDim, pp.dim);
      row = project(projection, act.values, inputDim, pp.dim);
    } else {
      row = spatialPyramid(act.values, act.height, act.width, act.channels, pp.levels);
      const expected = pyramidDim(act.channels, pp.levels);
      if (row.length !== expected) {
        throw new BadSpecError(`pyramid produced dim ${row.length}, expected ${expected}`);
      }
    }
    if (rows === null) {
      dim = row.length;
      rows = new Float32Array(imagePaths.length * dim);
    } else if (row.length !== dim) {
      throw new BadSpecError(`image ${imagePaths[i]} produced dim ${row.length}, expected ${dim}`);
    }
    rows.set(Float32Array.from(row as Float32Array), i * dim);
  }

  const id = techniqueId(spec);
  writeDescriptorFile(spec.outputPath, rows!, imagePaths.length, dim, imagePaths, id);
  return { outputPath: spec.outputPath, techniqueId: id, count: imagePaths.length, dim };
}
