/** Gaussian random projection for flattened activation maps. */

import { SeededRng } from "./random.js";

/**
 * Projection matrix with entries N(0, 1/outputDim), row-major
 * (outputDim x inputDim). A pure function of (seed, inputDim, outputDim):
 * entries are drawn in row-major order from one seeded stream.
 */
export function projectionMatrix(
  seed: number,
  inputDim: number,
  outputDim: number,
): Float64Array {
  if (inputDim < 1 || outputDim < 1) {
    throw new RangeError(`projection dims must be >= 1, got ${inputDim} -> ${outputDim}`);
  }
  const rng = new SeededRng(seed);
  const scale = 1 / Math.sqrt(outputDim);
  const matrix = new Float64Array(outputDim * inputDim);
  for (let i = 0; i < matrix.length; i++) {
    matrix[i] = rng.nextGaussian() * scale;
  }
  return matrix;
}

/** y = P x for a row-major (outputDim x inputDim) matrix. */
export function project(
  matrix: Float64Array,
  x: ArrayLike<number>,
  inputDim: number,
  outputDim: number,
): Float64Array {
  if (x.length !== inputDim) {
    throw new RangeError(`input has dim ${x.length}, projection expects ${inputDim}`);
  }
  const y = new Float64Array(outputDim);
  for (let row = 0; row < outputDim; row++) {
    let acc = 0;
    const base = row * inputDim;
    for (let col = 0; col < inputDim; col++) {
      acc += matrix[base + col] * x[col];
    }
    y[row] = acc;
  }
  return y;
}
