"""Distortion metrics, motion-compensated prediction quality and coverage.

The two kernel functions `block_sad` and `block_sad_batch` are the only
places where candidate SADs are actually computed; the engines call them
through this module namespace so tests can swap in instrumented versions to
audit comparison counts.
"""

from __future__ import annotations

import math
import warnings
from typing import Iterable, NamedTuple

import numpy as np

from .attention import AttentionMap, top_fraction_mask
from .frame import LumaPlane, MotionField
from .stopping import SadSampleSet
from .validation import check_same_dims

PEAK = 255.0


class NoMotionWarning(UserWarning):
    """A coverage score was requested for a field with no nonzero vectors."""


def sad(block_a: np.ndarray, block_b: np.ndarray) -> int:
    """Sum of absolute differences between two equally-sized pixel blocks."""
    a = np.asarray(block_a)
    b = np.asarray(block_b)
    if a.shape != b.shape:
        raise ValueError(f"block shapes differ: {a.shape} vs {b.shape}")
    return int(np.abs(a.astype(np.int32) - b.astype(np.int32)).sum())


def block_sad(block_i32: np.ndarray, patch: np.ndarray) -> int:
    """Hot-path scalar kernel; `block_i32` is the current block pre-cast to int32."""
    return int(np.abs(block_i32 - patch).sum())


def block_sad_batch(block_i32: np.ndarray, windows: np.ndarray) -> np.ndarray:
    """Hot-path batch kernel over a (rows, cols, b, b) sliding-window view."""
    diff = windows.astype(np.int32) - block_i32
    return np.abs(diff).sum(axis=(2, 3), dtype=np.int64)


def motion_compensate(reference: LumaPlane, field: MotionField) -> LumaPlane:
    """Predicts the current frame by copying displaced reference blocks.

    Pixels outside the block grid (remainder margins) are copied from the
    reference unchanged.
    """
    grid = field.grid
    if (grid.frame_width, grid.frame_height) != (reference.width, reference.height):
        raise ValueError(
            f"field grid was built for {grid.frame_width}x{grid.frame_height}, "
            f"reference is {reference.width}x{reference.height}"
        )
    out = reference.data.copy()
    b = grid.block_size
    for k, x, y in grid.block_origins():
        dx, dy = field.vectors[k]
        out[y : y + b, x : x + b] = reference.data[
            y + dy : y + dy + b, x + dx : x + dx + b
        ]
    return LumaPlane(out)


def mse(original: LumaPlane, predicted: LumaPlane) -> float:
    check_same_dims(original, predicted)
    diff = original.data.astype(np.float64) - predicted.data.astype(np.float64)
    return float(np.mean(diff * diff))


def psnr(original: LumaPlane, predicted: LumaPlane) -> float:
    """10 log10(255^2 / MSE) in dB; identical planes give the inf sentinel."""
    err = mse(original, predicted)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / err)


def semantic_coverage_score(
    field: MotionField,
    attention: AttentionMap,
    fraction: float = 0.2,
    denominator: str = "moving",
) -> float:
    """Percentage of nonzero motion vectors landing in the top-attention blocks.

    The default denominator counts only moving (nonzero-vector) blocks, so a
    static background cannot inflate the score; denominator="all" divides by
    the full block count instead. With no nonzero vectors the score is 0 by
    convention and a NoMotionWarning is emitted, since the moving-block ratio
    is undefined for a fully static field.
    """
    if not attention.grid_matches(field.grid):
        raise ValueError(
            f"attention grid {attention.cols}x{attention.rows} does not match "
            f"field grid {field.grid.cols}x{field.grid.rows}"
        )
    if denominator not in ("moving", "all"):
        raise ValueError(f"denominator must be 'moving' or 'all', got {denominator!r}")
    moving = field.nonzero_indices()
    if moving.size == 0:
        warnings.warn(
            "no nonzero motion vectors; coverage score defaults to 0",
            NoMotionWarning,
            stacklevel=2,
        )
        return 0.0
    mask = top_fraction_mask(attention, fraction)
    hits = sum(1 for k in moving if int(k) in mask)
    base = field.num_blocks if denominator == "all" else moving.size
    return 100.0 * hits / base


class CdfPoint(NamedTuple):
    y: float
    f: float


class QuantileMark(NamedTuple):
    q: float
    y: float


def export_cdf_data(
    samples: SadSampleSet | Iterable[float],
    quantiles: Iterable[float] = (0.1,),
) -> tuple[list[CdfPoint], list[QuantileMark]]:
    """Step-CDF points over the sample range plus marked quantile thresholds.

    The threshold for quantile q is the smallest observed value y with
    F(y) >= q (order statistic, lower tie-break).
    """
    if not isinstance(samples, SadSampleSet):
        samples = SadSampleSet(samples)
    if len(samples) == 0:
        raise ValueError("cannot export a CDF for an empty sample set")
    values = samples.sorted_values
    n = values.size
    uniq, counts = np.unique(values, return_counts=True)
    cum = np.cumsum(counts) / n
    points = [CdfPoint(float(y), float(f)) for y, f in zip(uniq, cum)]

    marks = []
    for q in quantiles:
        if not 0.0 < q <= 1.0:
            raise ValueError(f"quantiles must lie in (0, 1], got {q}")
        idx = int(np.searchsorted(cum, q, side="left"))
        marks.append(QuantileMark(float(q), float(uniq[min(idx, uniq.size - 1)])))
    return points, marks


def write_cdf_tsv(
    path,
    samples: SadSampleSet | Iterable[float],
    quantiles: Iterable[float] = (0.1,),
) -> None:
    """Two-column `y<TAB>F` plot data; quantile marks as leading comments."""
    points, marks = export_cdf_data(samples, quantiles)
    with open(path, "w") as fh:
        for mark in marks:
            fh.write(f"# quantile\t{mark.q:g}\t{mark.y:.6f}\n")
        for pt in points:
            fh.write(f"{pt.y:.6f}\t{pt.f:.8f}\n")
