"""Y4M and raw planar YUV ingestion.

Only the luma plane feeds motion estimation; chroma is parsed and skipped.
Readers are streaming (frame at a time) so long 1080p sequences do not need
to fit in memory at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator

from .errors import TruncationError, VideoFormatError
from .frame import LumaPlane

Y4M_SIGNATURE = b"YUV4MPEG2"
_FRAME_MARKER = b"FRAME"
_MAX_HEADER = 2048


@dataclass(frozen=True)
class VideoHeader:
    width: int
    height: int
    chroma: str = "420"
    frame_count: int | None = None  # unknown for streams

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise VideoFormatError(
                f"frame dimensions must be positive, got {self.width}x{self.height}"
            )
        if self.chroma == "420" and (self.width % 2 or self.height % 2):
            raise VideoFormatError(
                f"4:2:0 chroma requires even dimensions, got {self.width}x{self.height}"
            )


def _read_line(stream: BinaryIO, what: str) -> bytes | None:
    """Reads up to a newline; None on clean EOF, error on mid-line EOF."""
    chunks = bytearray()
    while len(chunks) < _MAX_HEADER:
        c = stream.read(1)
        if not c:
            if chunks:
                raise VideoFormatError(f"stream ended inside {what}")
            return None
        if c == b"\n":
            return bytes(chunks)
        chunks += c
    raise VideoFormatError(f"{what} exceeds {_MAX_HEADER} bytes")


def parse_y4m_header(line: bytes) -> VideoHeader:
    """Parses the `YUV4MPEG2 W.. H.. ...` stream header line.

    Parameters other than W/H/C are accepted and ignored. A missing C tag
    defaults to 4:2:0 per the de-facto convention.
    """
    fields = line.split(b" ")
    if fields[0] != Y4M_SIGNATURE:
        raise VideoFormatError("missing YUV4MPEG2 signature")
    width = height = None
    chroma = "420"
    for tag in fields[1:]:
        if not tag:
            continue
        key, value = tag[:1], tag[1:]
        try:
            if key == b"W":
                width = int(value)
            elif key == b"H":
                height = int(value)
            elif key == b"C":
                chroma = value.decode("ascii")
        except (ValueError, UnicodeDecodeError) as exc:
            raise VideoFormatError(f"bad Y4M header tag {tag!r}") from exc
    if width is None or height is None:
        raise VideoFormatError("Y4M header lacks W or H tag")
    if not chroma.startswith("420"):
        raise VideoFormatError(f"unsupported chroma format C{chroma} (only 4:2:0)")
    return VideoHeader(width=width, height=height, chroma="420")


def read_y4m(stream: BinaryIO) -> tuple[VideoHeader, Iterator[LumaPlane]]:
    """Parses the header and returns it with a lazy luma-plane iterator."""
    header_line = _read_line(stream, "Y4M stream header")
    if header_line is None:
        raise VideoFormatError("empty stream, missing YUV4MPEG2 signature")
    header = parse_y4m_header(header_line)

    luma_size = header.width * header.height
    chroma_size = luma_size // 2  # two quarter-size planes for 4:2:0

    def frames() -> Iterator[LumaPlane]:
        index = 0
        while True:
            marker = _read_line(stream, f"FRAME marker of frame {index}")
            if marker is None:
                return
            if not marker.startswith(_FRAME_MARKER):
                raise VideoFormatError(
                    f"expected FRAME marker at frame {index}, got {marker[:16]!r}"
                )
            payload = stream.read(luma_size + chroma_size)
            if len(payload) < luma_size + chroma_size:
                raise TruncationError(
                    f"frame {index} truncated: expected {luma_size + chroma_size} "
                    f"payload bytes, got {len(payload)}",
                    frame_index=index,
                )
            yield LumaPlane.from_bytes(payload[:luma_size], header.width, header.height)
            index += 1

    return header, frames()


def read_raw_yuv(
    stream: BinaryIO, width: int, height: int, fmt: str = "420"
) -> Iterator[LumaPlane]:
    """Splits a headerless stream into frames of the given dimensions.

    fmt "420" expects w*h*3/2 bytes per frame, "luma" exactly w*h.
    """
    if fmt == "420":
        VideoHeader(width, height, "420")  # reuse the even-dims check
        frame_size = width * height * 3 // 2
    elif fmt in ("luma", "luma_only", "gray"):
        frame_size = width * height
    else:
        raise VideoFormatError(f"unknown raw format {fmt!r}")
    luma_size = width * height

    index = 0
    while True:
        payload = stream.read(frame_size)
        if not payload:
            return
        if len(payload) < frame_size:
            raise TruncationError(
                f"frame {index} truncated: stream length is not a multiple of "
                f"the {frame_size}-byte frame size",
                frame_index=index,
            )
        yield LumaPlane.from_bytes(payload[:luma_size], width, height)
        index += 1


def write_y4m(
    stream: BinaryIO, frames: Iterable[LumaPlane], fps: tuple[int, int] = (25, 1)
) -> int:
    """Writes frames as a 4:2:0 Y4M stream with neutral chroma; returns count.

    Fixture/export plumbing: motion estimation never reads chroma back.
    """
    count = 0
    chroma = None
    for plane in frames:
        if count == 0:
            stream.write(
                b"YUV4MPEG2 W%d H%d F%d:%d Ip A1:1 C420\n"
                % (plane.width, plane.height, fps[0], fps[1])
            )
            chroma = bytes([128]) * (plane.width * plane.height // 2)
        stream.write(b"FRAME\n")
        stream.write(plane.tobytes())
        stream.write(chroma)
        count += 1
    if count == 0:
        raise ValueError("write_y4m needs at least one frame to emit a header")
    return count


def write_raw_luma(stream: BinaryIO, frames: Iterable[LumaPlane]) -> int:
    count = 0
    for plane in frames:
        stream.write(plane.tobytes())
        count += 1
    return count


def iter_luma(
    path: str | Path,
    fmt: str | None = None,
    width: int | None = None,
    height: int | None = None,
) -> tuple[VideoHeader, Iterator[LumaPlane]]:
    """Opens a video file by format (inferred from the extension by default).

    Raw formats need explicit dimensions since the files carry no header.
    """
    path = Path(path)
    if fmt is None:
        suffix = path.suffix.lower()
        fmt = "y4m" if suffix == ".y4m" else "420"
    stream = open(path, "rb")
    if fmt == "y4m":
        return read_y4m(stream)
    if width is None or height is None:
        stream.close()
        raise VideoFormatError(
            f"raw format {fmt!r} needs explicit width/height for {path}"
        )
    header = VideoHeader(width, height, "420")
    return header, read_raw_yuv(stream, width, height, fmt)


def read_all_frames(
    path: str | Path,
    fmt: str | None = None,
    width: int | None = None,
    height: int | None = None,
    limit: int | None = None,
) -> tuple[VideoHeader, list[LumaPlane]]:
    """Eagerly reads up to `limit` frames (bench-sized sequences fit memory)."""
    header, it = iter_luma(path, fmt=fmt, width=width, height=height)
    frames: list[LumaPlane] = []
    for plane in it:
        frames.append(plane)
        if limit is not None and len(frames) >= limit:
            break
    return header, frames
