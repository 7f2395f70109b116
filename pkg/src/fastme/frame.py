"""Frames, block tilings, motion fields and search-window geometry.

All types are immutable after construction so they can be shared freely
between parallel per-block searches.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, NamedTuple

import numpy as np

VALID_BLOCK_SIZES = (8, 16, 32)


class MotionVector(NamedTuple):
    dx: int
    dy: int


@dataclass(frozen=True)
class LumaPlane:
    """Single 8-bit luma raster stored as a read-only (height, width) array."""

    data: np.ndarray

    def __post_init__(self):
        if not isinstance(self.data, np.ndarray) or self.data.ndim != 2:
            raise ValueError("luma plane must be a 2-D array")
        if self.data.dtype != np.uint8:
            raise ValueError(f"luma samples must be uint8, got {self.data.dtype}")
        if self.data.size == 0:
            raise ValueError("luma plane must be non-empty")
        self.data.setflags(write=False)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @classmethod
    def from_bytes(cls, buf: bytes, width: int, height: int) -> "LumaPlane":
        if len(buf) != width * height:
            raise ValueError(
                f"expected {width * height} luma bytes, got {len(buf)}"
            )
        arr = np.frombuffer(buf, dtype=np.uint8).reshape(height, width).copy()
        return cls(arr)

    def tobytes(self) -> bytes:
        return self.data.tobytes()


@dataclass(frozen=True)
class BlockGrid:
    """Non-overlapping b x b tiling of a frame.

    Remainder pixels on the right/bottom edge (when the frame dimensions are
    not multiples of the block size) are excluded from the grid, so every
    block covers a full b x b pixel footprint.
    """

    block_size: int
    cols: int
    rows: int
    frame_width: int
    frame_height: int

    @property
    def num_blocks(self) -> int:
        return self.cols * self.rows

    def origin_of(self, index: int) -> tuple[int, int]:
        """Pixel origin (x, y) of block `index` (row-major)."""
        if not 0 <= index < self.num_blocks:
            raise IndexError(f"block index {index} out of range")
        b = self.block_size
        return b * (index % self.cols), b * (index // self.cols)

    def index_of(self, x: int, y: int) -> int:
        """Inverse of origin_of for on-grid pixel origins."""
        b = self.block_size
        if x % b or y % b:
            raise ValueError(f"({x}, {y}) is not a block origin for b={b}")
        col, row = x // b, y // b
        if not (0 <= col < self.cols and 0 <= row < self.rows):
            raise ValueError(f"({x}, {y}) lies outside the grid")
        return row * self.cols + col

    def block_origins(self) -> Iterator[tuple[int, int, int]]:
        """Yields (index, x, y) for every block."""
        for k in range(self.num_blocks):
            x, y = self.origin_of(k)
            yield k, x, y

    def matches(self, other: "BlockGrid") -> bool:
        return (
            self.block_size == other.block_size
            and self.cols == other.cols
            and self.rows == other.rows
        )


@dataclass(frozen=True)
class MotionField:
    """Per-block motion vectors plus per-block search statistics.

    stopping_step is -1 for blocks whose search ran to exhaustion; threshold
    is NaN where the engine has no threshold notion (FS/TSS/DS).
    """

    grid: BlockGrid
    vectors: np.ndarray        # (n, 2) int32, columns [dx, dy]
    min_sad: np.ndarray        # (n,) int64
    comparisons: np.ndarray    # (n,) int64
    stopping_step: np.ndarray  # (n,) int64, -1 when search was not cut short
    threshold: np.ndarray      # (n,) float64, NaN where not applicable

    def __post_init__(self):
        n = self.grid.num_blocks
        if self.vectors.shape != (n, 2):
            raise ValueError(f"vectors must have shape ({n}, 2)")
        for name in ("min_sad", "comparisons", "stopping_step", "threshold"):
            arr = getattr(self, name)
            if arr.shape != (n,):
                raise ValueError(f"{name} must have shape ({n},)")
        if (self.comparisons < 1).any():
            raise ValueError("every searched block must record >= 1 comparison")
        stopped = self.stopping_step >= 0
        if (self.stopping_step[stopped] > self.comparisons[stopped]).any():
            raise ValueError("stopping_step cannot exceed comparisons")
        for arr in (self.vectors, self.min_sad, self.comparisons,
                    self.stopping_step, self.threshold):
            arr.setflags(write=False)

    @property
    def num_blocks(self) -> int:
        return self.grid.num_blocks

    def vector_of(self, index: int) -> MotionVector:
        dx, dy = self.vectors[index]
        return MotionVector(int(dx), int(dy))

    def nonzero_indices(self) -> np.ndarray:
        """Indices of blocks whose motion vector is not (0, 0)."""
        return np.flatnonzero((self.vectors != 0).any(axis=1))

    def total_sad(self) -> int:
        return int(self.min_sad.sum())

    def total_comparisons(self) -> int:
        return int(self.comparisons.sum())


@dataclass(frozen=True)
class SearchParams:
    """Block size and search half-width p; windows clamp at frame borders."""

    block_size: int = 16
    search_range: int = 7

    def __post_init__(self):
        if self.block_size not in VALID_BLOCK_SIZES:
            raise ValueError(
                f"block_size must be one of {VALID_BLOCK_SIZES}, got {self.block_size}"
            )
        if self.search_range < 1:
            raise ValueError(f"search_range must be >= 1, got {self.search_range}")


def partition_into_blocks(frame: LumaPlane, block_size: int) -> BlockGrid:
    """Tile a frame into non-overlapping b x b blocks (remainder excluded)."""
    if block_size not in VALID_BLOCK_SIZES:
        raise ValueError(
            f"block_size must be one of {VALID_BLOCK_SIZES}, got {block_size}"
        )
    if frame.width < block_size or frame.height < block_size:
        raise ValueError(
            f"frame {frame.width}x{frame.height} is smaller than one "
            f"{block_size}x{block_size} block"
        )
    return BlockGrid(
        block_size=block_size,
        cols=frame.width // block_size,
        rows=frame.height // block_size,
        frame_width=frame.width,
        frame_height=frame.height,
    )


def window_bounds(
    origin: tuple[int, int],
    block_size: int,
    search_range: int,
    frame_width: int,
    frame_height: int,
) -> tuple[int, int, int, int]:
    """Inclusive displacement bounds (dx_lo, dx_hi, dy_lo, dy_hi).

    The window is intersected with the frame so every candidate block reads
    real pixels; (0, 0) is always inside.
    """
    x, y = origin
    p = search_range
    dx_lo = max(-p, -x)
    dx_hi = min(p, frame_width - block_size - x)
    dy_lo = max(-p, -y)
    dy_hi = min(p, frame_height - block_size - y)
    return dx_lo, dx_hi, dy_lo, dy_hi


def candidate_window(
    origin: tuple[int, int], params: SearchParams, frame: LumaPlane
) -> list[MotionVector]:
    """All displacements whose shifted block stays inside the frame.

    Raster order: dy outer, dx inner, both ascending. Deterministic so that
    sequential stopping rules are reproducible.
    """
    dx_lo, dx_hi, dy_lo, dy_hi = window_bounds(
        origin, params.block_size, params.search_range, frame.width, frame.height
    )
    return [
        MotionVector(dx, dy)
        for dy in range(dy_lo, dy_hi + 1)
        for dx in range(dx_lo, dx_hi + 1)
    ]


@lru_cache(maxsize=256)
def center_outward_order(
    bounds: tuple[int, int, int, int]
) -> tuple[MotionVector, ...]:
    """Candidates of a rectangular window sorted center-outward.

    Primary key |dx|+|dy|, ties in raster order (dy, then dx). This is the
    evaluation order of the exhaustive-walk engines; (0, 0) always comes
    first, which makes the zero-motion case stop immediately.
    """
    dx_lo, dx_hi, dy_lo, dy_hi = bounds
    cands = [
        MotionVector(dx, dy)
        for dy in range(dy_lo, dy_hi + 1)
        for dx in range(dx_lo, dx_hi + 1)
    ]
    cands.sort(key=lambda d: (abs(d.dx) + abs(d.dy), d.dy, d.dx))
    return tuple(cands)
