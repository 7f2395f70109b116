#!/usr/bin/env node
/**
 * extract-attn: run a local tfjs vision model over video frames and write
 * one .attn.json block-attention file per frame.
 *
 * Exit codes: 0 success, 1 runtime failure, 2 configuration error.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { parseArgs } from "node:util";

import { writeMap } from "./attn-json.js";
import { DEFAULT_CONFIG, ExtractorConfig, extractFrame } from "./extract.js";
import { loadModel, SaliencyMode } from "./model.js";
import { readPngLuma } from "./png.js";
import { GrayFrame, readY4M } from "./y4m.js";

const USAGE = `usage: extract-attn --input <clip.y4m | frame-dir> --model <dir> --out <dir>
  --input   Y4M file or a directory of PNG frame dumps (sorted by name)
  --model   directory holding a tfjs layers model (model.json + weights.bin)
  --out     output directory for frame-NNNNNN.attn.json files
  --mode    features | direct            (default features)
  --block-size <n>                       (default 16)
  --resize <edge>                        (default 224)
  --source  tag recorded in the files    (default vit)
  --frames  limit on the number of frames`;

class ConfigError extends Error {}

function loadFrames(input: string, limit?: number): GrayFrame[] {
  const stat = fs.statSync(input);
  if (stat.isDirectory()) {
    const names = fs
      .readdirSync(input)
      .filter((n) => n.toLowerCase().endsWith(".png"))
      .sort();
    if (names.length === 0) {
      throw new ConfigError(`--input directory ${input} holds no .png frames`);
    }
    const chosen = limit !== undefined ? names.slice(0, limit) : names;
    return chosen.map((n) => readPngLuma(fs.readFileSync(path.join(input, n))));
  }
  if (input.toLowerCase().endsWith(".y4m")) {
    return readY4M(fs.readFileSync(input), limit);
  }
  throw new ConfigError(
    `--input must be a .y4m file or a directory of .png frames, got ${input}`,
  );
}

export async function runCli(argv: string[]): Promise<number> {
  let values;
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        input: { type: "string" },
        model: { type: "string" },
        out: { type: "string" },
        mode: { type: "string", default: DEFAULT_CONFIG.mode },
        "block-size": { type: "string", default: String(DEFAULT_CONFIG.blockSize) },
        resize: { type: "string", default: String(DEFAULT_CONFIG.resizeEdge) },
        source: { type: "string", default: DEFAULT_CONFIG.source },
        frames: { type: "string" },
        help: { type: "boolean", default: false },
      },
    }));
  } catch (err) {
    console.error(`extract-attn: ${(err as Error).message}`);
    console.error(USAGE);
    return 2;
  }
  if (values.help) {
    console.log(USAGE);
    return 0;
  }

  try {
    for (const flag of ["input", "model", "out"] as const) {
      if (!values[flag]) {
        throw new ConfigError(`--${flag} is required`);
      }
    }
    const mode = values.mode as SaliencyMode;
    if (mode !== "features" && mode !== "direct") {
      throw new ConfigError(`--mode must be features or direct, got ${values.mode}`);
    }
    const config: ExtractorConfig = {
      mode,
      blockSize: parseInt(values["block-size"]!, 10),
      resizeEdge: parseInt(values.resize!, 10),
      source: values.source!,
    };
    if (!(config.blockSize > 0) || !(config.resizeEdge > 0)) {
      throw new ConfigError("--block-size and --resize must be positive integers");
    }
    const limit = values.frames !== undefined ? parseInt(values.frames, 10) : undefined;

    const frames = loadFrames(values.input!, limit);
    const model = await loadModel(values.model!);
    for (let i = 0; i < frames.length; i++) {
      const map = extractFrame(model, frames[i], i, config);
      const file = writeMap(map, values.out!);
      console.log(`wrote ${file} (${map.cols}x${map.rows})`);
    }
    return 0;
  } catch (err) {
    if (err instanceof ConfigError) {
      console.error(`extract-attn: configuration error: ${(err as Error).message}`);
      return 2;
    }
    console.error(`extract-attn: error: ${(err as Error).message}`);
    return 1;
  }
}

const isMain =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${path.resolve(process.argv[1])}`).href;
if (isMain) {
  runCli(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
