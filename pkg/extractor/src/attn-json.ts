/** The `.attn.json` block-attention file contract shared with the toolkit. */

import * as fs from "node:fs";
import * as path from "node:path";

export const FORMAT_VERSION = 1;
export const FILE_SUFFIX = ".attn.json";

export interface AttentionMapFile {
  format_version: number;
  block_size: number;
  cols: number;
  rows: number;
  source: string;
  frame_index: number;
  /** Row-major, length cols*rows, every score in [0, 1]. */
  scores: number[];
}

export function frameFileName(index: number, prefix = "frame-"): string {
  return `${prefix}${String(index).padStart(6, "0")}${FILE_SUFFIX}`;
}

export function validateMap(map: AttentionMapFile): void {
  if (map.scores.length !== map.cols * map.rows) {
    throw new Error(
      `scores length ${map.scores.length} does not match ${map.cols}x${map.rows}`,
    );
  }
  for (const s of map.scores) {
    if (!Number.isFinite(s) || s < 0 || s > 1) {
      throw new Error(`attention score ${s} outside [0, 1]`);
    }
  }
}

export function writeMap(map: AttentionMapFile, dir: string): string {
  validateMap(map);
  const file = path.join(dir, frameFileName(map.frame_index));
  fs.mkdirSync(dir, { recursive: true });
  fs.writeFileSync(file, JSON.stringify(map) + "\n");
  return file;
}
