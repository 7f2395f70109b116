/** Minimal Y4M reader: luma planes only, 4:2:0 chroma skipped. */

export interface GrayFrame {
  width: number;
  height: number;
  /** Row-major 8-bit luma samples, length width*height. */
  data: Uint8Array;
}

const SIGNATURE = "YUV4MPEG2";

function readLine(buf: Buffer, offset: number): { line: string; next: number } {
  const nl = buf.indexOf(0x0a, offset);
  if (nl < 0) {
    throw new Error("Y4M stream ended inside a header line");
  }
  return { line: buf.toString("latin1", offset, nl), next: nl + 1 };
}

export function readY4M(buf: Buffer, limit?: number): GrayFrame[] {
  const header = readLine(buf, 0);
  const fields = header.line.split(" ");
  if (fields[0] !== SIGNATURE) {
    throw new Error("missing YUV4MPEG2 signature");
  }
  let width = 0;
  let height = 0;
  let chroma = "420";
  for (const tag of fields.slice(1)) {
    if (tag.startsWith("W")) width = parseInt(tag.slice(1), 10);
    else if (tag.startsWith("H")) height = parseInt(tag.slice(1), 10);
    else if (tag.startsWith("C")) chroma = tag.slice(1);
  }
  if (!width || !height) {
    throw new Error("Y4M header lacks W or H tag");
  }
  if (!chroma.startsWith("420")) {
    throw new Error(`unsupported chroma format C${chroma} (only 4:2:0)`);
  }

  const lumaSize = width * height;
  const frameSize = lumaSize + lumaSize / 2;
  const frames: GrayFrame[] = [];
  let offset = header.next;
  while (offset < buf.length) {
    if (limit !== undefined && frames.length >= limit) break;
    const marker = readLine(buf, offset);
    if (!marker.line.startsWith("FRAME")) {
      throw new Error(`expected FRAME marker at frame ${frames.length}`);
    }
    const start = marker.next;
    if (start + frameSize > buf.length) {
      throw new Error(
        `frame ${frames.length} truncated: expected ${frameSize} payload bytes`,
      );
    }
    frames.push({
      width,
      height,
      data: new Uint8Array(buf.subarray(start, start + lumaSize)),
    });
    offset = start + frameSize;
  }
  return frames;
}
