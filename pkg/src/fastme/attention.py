"""Per-block semantic attention maps.

A map assigns every block of a frame a score in [0, 1]; higher means more
semantically important. Maps arrive either from files written by an external
extractor or from the synthetic generators used for testing and benchmarks.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AttentionFormatError, ConfigError
from .frame import BlockGrid

FORMAT_VERSION = 1
FILE_SUFFIX = ".attn.json"
_FRAME_FILE_RE = re.compile(r"(\d+)\.attn\.json$")

SYNTHETIC_KINDS = ("uniform", "gaussian_blob", "checkerboard")


@dataclass(frozen=True)
class AttentionMap:
    block_size: int
    cols: int
    rows: int
    scores: np.ndarray  # (cols*rows,) float64 row-major, each in [0, 1]
    source: str = "synthetic:uniform"
    frame_index: int = 0

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        object.__setattr__(self, "scores", scores)
        if self.cols <= 0 or self.rows <= 0:
            raise AttentionFormatError(
                f"grid must be positive, got {self.cols}x{self.rows}"
            )
        if scores.shape != (self.cols * self.rows,):
            raise AttentionFormatError(
                f"expected {self.cols * self.rows} scores for a "
                f"{self.cols}x{self.rows} grid, got {scores.size}"
            )
        if not np.isfinite(scores).all():
            raise ValueError("attention scores must be finite")
        if (scores < 0).any() or (scores > 1).any():
            bad = scores[(scores < 0) | (scores > 1)][0]
            raise ValueError(f"attention scores must lie in [0, 1], got {bad}")
        scores.setflags(write=False)

    @property
    def num_blocks(self) -> int:
        return self.cols * self.rows

    def score_of(self, block_index: int) -> float:
        return float(self.scores[block_index])

    def as_grid(self) -> np.ndarray:
        return self.scores.reshape(self.rows, self.cols)

    def grid_matches(self, grid: BlockGrid) -> bool:
        return (self.cols, self.rows, self.block_size) == (
            grid.cols,
            grid.rows,
            grid.block_size,
        )


def load_attention_map(path: str | Path) -> AttentionMap:
    """Loads and validates one `.attn.json` file."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise AttentionFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict):
        raise AttentionFormatError(f"{path}: expected a JSON object")
    try:
        version = payload["format_version"]
        block_size = int(payload["block_size"])
        cols = int(payload["cols"])
        rows = int(payload["rows"])
        scores = payload["scores"]
    except KeyError as exc:
        raise AttentionFormatError(f"{path}: missing field {exc.args[0]!r}") from exc
    if version != FORMAT_VERSION:
        raise AttentionFormatError(
            f"{path}: unsupported format_version {version!r}"
        )
    if not isinstance(scores, list):
        raise AttentionFormatError(f"{path}: scores must be a JSON array")
    if len(scores) != cols * rows:
        raise AttentionFormatError(
            f"{path}: scores length {len(scores)} does not match {cols}x{rows}"
        )
    try:
        return AttentionMap(
            block_size=block_size,
            cols=cols,
            rows=rows,
            scores=np.asarray(scores, dtype=np.float64),
            source=str(payload.get("source", "unknown")),
            frame_index=int(payload.get("frame_index", 0)),
        )
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def save_attention_map(amap: AttentionMap, path: str | Path) -> None:
    payload = {
        "format_version": FORMAT_VERSION,
        "block_size": amap.block_size,
        "cols": amap.cols,
        "rows": amap.rows,
        "source": amap.source,
        "frame_index": amap.frame_index,
        "scores": [float(s) for s in amap.scores],
    }
    Path(path).write_text(json.dumps(payload) + "\n")


def frame_file_name(index: int, prefix: str = "frame-") -> str:
    """Canonical per-frame file name: zero-padded index plus suffix."""
    return f"{prefix}{index:06d}{FILE_SUFFIX}"


def load_attention_dir(path: str | Path) -> dict[int, AttentionMap]:
    """Loads every `<...><index>.attn.json` file of a directory, keyed by index."""
    path = Path(path)
    maps: dict[int, AttentionMap] = {}
    for child in sorted(path.iterdir()):
        m = _FRAME_FILE_RE.search(child.name)
        if m:
            maps[int(m.group(1))] = load_attention_map(child)
    if not maps:
        raise AttentionFormatError(f"no *{FILE_SUFFIX} files with frame indices in {path}")
    return maps


def aggregate_to_blocks(
    saliency: np.ndarray, block_size: int, source: str = "aggregated"
) -> AttentionMap:
    """Mean-pools a pixel-level [0, 1] saliency grid over b x b blocks.

    Remainder rows/columns beyond the last full block are excluded, matching
    the frame tiling convention.
    """
    saliency = np.asarray(saliency, dtype=np.float64)
    if saliency.ndim != 2:
        raise ValueError("saliency must be a 2-D array")
    h, w = saliency.shape
    if h < block_size or w < block_size:
        raise ValueError(
            f"saliency {w}x{h} is smaller than one {block_size}x{block_size} block"
        )
    if (saliency < 0).any() or (saliency > 1).any():
        raise ValueError("pixel saliency must lie in [0, 1]")
    rows, cols = h // block_size, w // block_size
    trimmed = saliency[: rows * block_size, : cols * block_size]
    pooled = trimmed.reshape(rows, block_size, cols, block_size).mean(axis=(1, 3))
    return AttentionMap(
        block_size=block_size,
        cols=cols,
        rows=rows,
        scores=np.clip(pooled, 0.0, 1.0).ravel(),
        source=source,
    )


def synthetic_attention(
    kind: str,
    cols: int,
    rows: int,
    block_size: int = 16,
    seed: int = 0,
    *,
    value: float = 0.5,
    cx: float | None = None,
    cy: float | None = None,
    sigma: float | None = None,
) -> AttentionMap:
    """Deterministic synthetic maps: uniform(c), gaussian_blob, checkerboard.

    The seed is accepted for interface stability; the current kinds are all
    parameter-deterministic and ignore it.
    """
    del seed
    if kind == "uniform":
        if not 0.0 <= value <= 1.0:
            raise ConfigError(f"uniform attention value must be in [0, 1], got {value}")
        scores = np.full(rows * cols, float(value))
    elif kind == "gaussian_blob":
        cx = (cols - 1) / 2 if cx is None else float(cx)
        cy = (rows - 1) / 2 if cy is None else float(cy)
        sigma = max(cols, rows) / 4 if sigma is None else float(sigma)
        if sigma <= 0:
            raise ConfigError(f"gaussian blob sigma must be positive, got {sigma}")
        c, r = np.meshgrid(np.arange(cols), np.arange(rows))
        d2 = (c - cx) ** 2 + (r - cy) ** 2
        scores = np.exp(-d2 / (2.0 * sigma**2)).ravel()
    elif kind == "checkerboard":
        c, r = np.meshgrid(np.arange(cols), np.arange(rows))
        scores = ((c + r) % 2 == 0).astype(np.float64).ravel()
    else:
        raise ConfigError(
            f"unknown synthetic attention kind {kind!r}; expected one of "
            f"{SYNTHETIC_KINDS}"
        )
    return AttentionMap(
        block_size=block_size,
        cols=cols,
        rows=rows,
        scores=scores,
        source=f"synthetic:{kind}",
    )


def parse_synthetic_spec(spec: str) -> tuple[str, dict]:
    """Parses CLI specs like `uniform:0.5`, `gaussian:11,9,4.3`, `checkerboard`.

    `gaussian` without arguments centers the blob on the grid.
    """
    name, _, argtext = spec.partition(":")
    name = name.strip().lower()
    args = [a for a in argtext.split(",") if a.strip()] if argtext else []
    try:
        if name == "uniform":
            return "uniform", {"value": float(args[0])} if args else {"value": 0.5}
        if name in ("gaussian", "gaussian_blob"):
            if not args:
                return "gaussian_blob", {}
            if len(args) != 3:
                raise ConfigError(
                    f"gaussian spec wants cx,cy,sigma; got {argtext!r}"
                )
            cx, cy, sigma = (float(a) for a in args)
            return "gaussian_blob", {"cx": cx, "cy": cy, "sigma": sigma}
        if name == "checkerboard":
            return "checkerboard", {}
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"bad synthetic attention spec {spec!r}") from exc
    raise ConfigError(
        f"unknown synthetic attention kind {name!r}; expected one of {SYNTHETIC_KINDS}"
    )


def top_fraction_mask(amap: AttentionMap, fraction: float = 0.2) -> set[int]:
    """Indices of the ceil(fraction * n) highest-scored blocks.

    Ties break toward the lower block index so the mask is deterministic.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    n = amap.num_blocks
    count = math.ceil(fraction * n)
    order = sorted(range(n), key=lambda k: (-amap.scores[k], k))
    return set(order[:count])
