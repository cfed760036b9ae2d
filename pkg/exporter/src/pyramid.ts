/** Spatial pyramid pooling over a (height, width, channels) activation map. */

/**
 * Max-pool the map over an l x l grid for each pyramid level and concatenate.
 * Output dim = channels * sum(l^2), channel-major within each cell; cells are
 * scanned row-major, levels in the given order. Cell boundaries split the
 * spatial extent as evenly as possible (ceil-division edges).
 */
export function spatialPyramid(
  map: ArrayLike<number>,
  height: number,
  width: number,
  channels: number,
  levels: number[],
): Float64Array {
  if (map.length !== height * width * channels) {
    throw new RangeError(
      `map holds ${map.length} values, expected ${height}x${width}x${channels}`,
    );
  }
  if (levels.length === 0 || levels.some((l) => !Number.isInteger(l) || l < 1)) {
    throw new RangeError(`pyramid levels must be positive integers, got [${levels}]`);
  }
  const cells = levels.reduce((s, l) => s + l * l, 0);
  const out = new Float64Array(channels * cells);
  let cellIndex = 0;
  for (const level of levels) {
    for (let cy = 0; cy < level; cy++) {
      for (let cx = 0; cx < level; cx++) {
        const y0 = Math.floor((cy * height) / level);
        const y1 = Math.max(y0 + 1, Math.floor(((cy + 1) * height) / level));
        const x0 = Math.floor((cx * width) / level);
        const x1 = Math.max(x0 + 1, Math.floor(((cx + 1) * width) / level));
        const base = cellIndex * channels;
        for (let c = 0; c < channels; c++) {
          let best = -Infinity;
          for (let y = y0; y < Math.min(y1, height); y++) {
            for (let x = x0; x < Math.min(x1, width); x++) {
              const v = map[(y * width + x) * channels + c];
              if (v > best) best = v;
            }
          }
          out[base + c] = best;
        }
        cellIndex++;
      }
    }
  }
  return out;
}

export function pyramidDim(channels: number, levels: number[]): number {
  return channels * levels.reduce((s, l) => s + l * l, 0);
}
