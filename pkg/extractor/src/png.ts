/** PNG frame ingestion: decode and convert to BT.601 luma. */

import { PNG } from "pngjs";

import type { GrayFrame } from "./y4m.js";

export function readPngLuma(buf: Buffer): GrayFrame {
  const png = PNG.sync.read(buf);
  const data = new Uint8Array(png.width * png.height);
  for (let i = 0; i < data.length; i++) {
    const r = png.data[4 * i];
    const g = png.data[4 * i + 1];
    const b = png.data[4 * i + 2];
    data[i] = Math.round(0.299 * r + 0.587 * g + 0.114 * b);
  }
  return { width: png.width, height: png.height, data };
}
