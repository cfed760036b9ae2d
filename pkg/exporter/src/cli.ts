#!/usr/bin/env node
/** vpr-export: write benchmark descriptor files from pretrained CNN layers.
 *
 * Usage:
 *   vpr-export --model <name-or-dir> --layer <name> --postprocess <spec>
 *              --images <list-file> --out <path>
 *
 * Postprocess specs: none | gp:DIM:SEED | spp:1,2
 * Exit codes: 0 success, 2 bad spec, 3 model/layer unavailable, 4 format error.
 */

import { parseArgs } from "util";

import { BadSpecError, FormatError, LayerNotFoundError, ModelUnavailableError } from "./errors.js";
import { exportDescriptors, parsePostprocess } from "./exporter.js";

export async function main(argv: string[]): Promise<number> {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        model: { type: "string" },
        layer: { type: "string" },
        postprocess: { type: "string", default: "none" },
        images: { type: "string" },
        out: { type: "string" },
      },
    });
  } catch (err) {
    console.error(`bad arguments: ${String(err)}`);
    return 2;
  }
  const { model, layer, postprocess, images, out } = parsed.values;
  if (!model || !layer || !images || !out) {
    console.error("required: --model, --layer, --images, --out (and optional --postprocess)");
    return 2;
  }
  try {
    const result = await exportDescriptors({
      modelName: model,
      layerName: layer,
      postprocess: parsePostprocess(postprocess!),
      imageListPath: images,
      outputPath: out,
    });
    console.log(
      `wrote ${result.outputPath}: technique_id=${result.techniqueId} ` +
        `count=${result.count} dim=${result.dim}`,
    );
    return 0;
  } catch (err) {
    if (err instanceof BadSpecError) {
      console.error(`bad spec: ${err.message}`);
      return 2;
    }
    if (err instanceof ModelUnavailableError || err instanceof LayerNotFoundError) {
      console.error(`model error: ${err.message}`);
      return 3;
    }
    if (err instanceof FormatError) {
      console.error(`format error: ${err.message}`);
      return 4;
    }
    console.error(String(err));
    return 1;
  }
}

const invokedDirectly = process.argv[1]?.endsWith("cli.js");
if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
