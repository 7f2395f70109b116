"""Input validation helpers shared by the engines, metrics and CLI."""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .frame import BlockGrid, LumaPlane, VALID_BLOCK_SIZES


def check_luma(obj, name: str = "frame") -> LumaPlane:
    if not isinstance(obj, LumaPlane):
        raise TypeError(f"{name} must be a LumaPlane, got {type(obj).__name__}")
    return obj


def check_same_dims(a: LumaPlane, b: LumaPlane) -> None:
    if a.data.shape != b.data.shape:
        raise ValueError(
            f"frame dimensions differ: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def check_block_size(block_size: int) -> int:
    if block_size not in VALID_BLOCK_SIZES:
        raise ConfigError(
            f"block size must be one of {VALID_BLOCK_SIZES}, got {block_size}"
        )
    return block_size


def check_search_range(search_range: int) -> int:
    if not isinstance(search_range, (int, np.integer)) or search_range < 1:
        raise ConfigError(f"search range must be a positive integer, got {search_range}")
    return int(search_range)


def check_probability(value: float, name: str, *, open_left: bool = True,
                      open_right: bool = True) -> float:
    v = float(value)
    lo_ok = v > 0.0 if open_left else v >= 0.0
    hi_ok = v < 1.0 if open_right else v <= 1.0
    if not (lo_ok and hi_ok):
        lo, hi = "(" if open_left else "[", ")" if open_right else "]"
        raise ConfigError(f"{name} must lie in {lo}0, 1{hi}, got {value}")
    return v


def check_attention_grid(attention, grid: BlockGrid) -> None:
    """Attention maps must tile exactly like the frame being estimated."""
    if attention is None:
        raise ConfigError("this engine requires an attention map and none was given")
    if (attention.cols, attention.rows, attention.block_size) != (
        grid.cols,
        grid.rows,
        grid.block_size,
    ):
        raise ConfigError(
            "attention grid "
            f"{attention.cols}x{attention.rows} (b={attention.block_size}) does not "
            f"match frame grid {grid.cols}x{grid.rows} (b={grid.block_size})"
        )
