"""Benchmark runner: engines x parameter sweeps over frame-pair sequences.

Every metric column except wall-clock time is deterministic for a fixed
config and seed; the CSV layout is fixed so repeated runs can be compared
byte for byte (time column excluded).
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import metrics
from .attention import (
    AttentionMap,
    load_attention_dir,
    load_attention_map,
    parse_synthetic_spec,
    synthetic_attention,
)
from .engines import build_engine
from .errors import ConfigError
from .frame import LumaPlane, partition_into_blocks
from .stopping import StoppingPolicy
from .video_io import read_all_frames

CSV_HEADER = (
    "sequence,resolution,engine,block_size,search_range,"
    "mean_time_s,mean_sad,mean_comparisons,psnr_db,scs_pct"
)


@dataclass
class BenchConfig:
    input_path: str | Path
    engines: tuple[str, ...] = ("fs",)
    frame_count: int | None = None
    fmt: str | None = None           # y4m | 420 | luma (None: infer from suffix)
    width: int | None = None         # raw formats only
    height: int | None = None
    block_sizes: tuple[int, ...] = (16,)
    search_ranges: tuple[int, ...] = (7,)
    policy: StoppingPolicy = field(default_factory=StoppingPolicy)
    attention: str | Path | None = None  # file, directory, or synthetic:<spec>
    scs_fraction: float = 0.2
    repetitions: int = 1
    seed: int = 0
    jobs: int = 1
    csv_path: str | Path | None = None

    def __post_init__(self):
        if not self.engines:
            raise ConfigError("at least one engine must be selected")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if any(e.strip().lower() in ("fastme", "fast_me", "fm") for e in self.engines):
            if self.attention is None:
                raise ConfigError(
                    "engine 'fastme' needs an attention source (--attn)"
                )


@dataclass(frozen=True)
class BenchRow:
    sequence: str
    resolution: str
    engine: str
    block_size: int
    search_range: int
    mean_time_s: float
    mean_sad: float
    mean_comparisons: float
    psnr_db: float
    scs_pct: float | None

    def csv_line(self) -> str:
        def num(x: float) -> str:
            if math.isinf(x):
                return "inf"
            return f"{x:.6f}"

        scs = "" if self.scs_pct is None else num(self.scs_pct)
        return (
            f"{self.sequence},{self.resolution},{self.engine},"
            f"{self.block_size},{self.search_range},"
            f"{num(self.mean_time_s)},{num(self.mean_sad)},"
            f"{num(self.mean_comparisons)},{num(self.psnr_db)},{scs}"
        )


def _resolve_attention(
    spec: str | Path | None, cols: int, rows: int, block_size: int, seed: int
) -> tuple[AttentionMap | None, dict[int, AttentionMap] | None]:
    """Returns (static_map, per_frame_maps); at most one is non-None."""
    if spec is None:
        return None, None
    text = str(spec)
    if text.startswith("synthetic:"):
        kind, params = parse_synthetic_spec(text.split(":", 1)[1])
        return (
            synthetic_attention(kind, cols, rows, block_size, seed=seed, **params),
            None,
        )
    path = Path(text)
    if path.is_dir():
        return None, load_attention_dir(path)
    return load_attention_map(path), None


def _attention_for_pair(
    static_map: AttentionMap | None,
    per_frame: dict[int, AttentionMap] | None,
    current_index: int,
):
    if static_map is not None:
        return static_map
    if per_frame is not None:
        try:
            return per_frame[current_index]
        except KeyError:
            raise ConfigError(
                f"no attention map for frame {current_index} in the supplied directory"
            ) from None
    return None


def run_benchmark(config: BenchConfig) -> list[BenchRow]:
    """Runs every engine x (b, p) combo x repetition and aggregates means.

    For the stopping engines with theta="fit", the rate for each frame pair
    is the MLE over the SADs observed on the previous pair (the first pair
    uses the bootstrap rate). Writes the CSV when csv_path is set.
    """
    header, frames = read_all_frames(
        config.input_path,
        fmt=config.fmt,
        width=config.width,
        height=config.height,
        limit=config.frame_count,
    )
    if len(frames) < 2:
        raise ConfigError(
            f"need at least 2 frames for motion estimation, got {len(frames)}"
        )
    sequence = Path(config.input_path).stem
    resolution = f"{header.width}x{header.height}"

    rows: list[BenchRow] = []
    for b in config.block_sizes:
        grid = partition_into_blocks(frames[0], b)
        static_map, per_frame = _resolve_attention(
            config.attention, grid.cols, grid.rows, b, config.seed
        )
        for p in config.search_ranges:
            for engine_name in config.engines:
                rows.append(
                    _run_combo(
                        config, engine_name, b, p, frames, sequence, resolution,
                        static_map, per_frame,
                    )
                )
    if config.csv_path is not None:
        write_csv(rows, config.csv_path)
    return rows


def _run_combo(
    config: BenchConfig,
    engine_name: str,
    b: int,
    p: int,
    frames: list[LumaPlane],
    sequence: str,
    resolution: str,
    static_map,
    per_frame,
) -> BenchRow:
    times: list[float] = []
    sads: list[float] = []
    comps: list[float] = []
    psnrs: list[float] = []
    scss: list[float] = []

    for _ in range(config.repetitions):
        engine = build_engine(engine_name, block_size=b, search_range=p,
                              policy=config.policy)
        for i in range(1, len(frames)):
            reference, current = frames[i - 1], frames[i]
            attention = _attention_for_pair(static_map, per_frame, i)
            t0 = time.perf_counter()
            field = engine.estimate_field(
                current, reference, attention=attention, jobs=config.jobs
            )
            times.append(time.perf_counter() - t0)
            sads.append(field.total_sad())
            comps.append(field.total_comparisons())
            predicted = metrics.motion_compensate(reference, field)
            psnrs.append(metrics.psnr(current, predicted))
            if attention is not None:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", metrics.NoMotionWarning)
                    scss.append(
                        metrics.semantic_coverage_score(
                            field, attention, config.scs_fraction
                        )
                    )
            if config.policy.fits_theta and hasattr(engine, "sad_samples_"):
                engine.fit(engine.sad_samples_)

    return BenchRow(
        sequence=sequence,
        resolution=resolution,
        engine=engine.name,
        block_size=b,
        search_range=p,
        mean_time_s=float(np.mean(times)),
        mean_sad=float(np.mean(sads)),
        mean_comparisons=float(np.mean(comps)),
        psnr_db=float(np.mean(psnrs)),
        scs_pct=float(np.mean(scss)) if scss else None,
    )


def write_csv(rows: list[BenchRow], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [CSV_HEADER] + [row.csv_line() for row in rows]
    path.write_text("\n".join(lines) + "\n")


def alpha_sweep(
    config: BenchConfig, alphas: tuple[float, ...] = (0.3, 0.5, 0.7, 0.9)
) -> list[BenchRow]:
    """Reruns the config's fastme engine at each blend factor."""
    rows = []
    for alpha in alphas:
        cfg = replace(
            config,
            engines=("fastme",),
            policy=replace_policy_alpha(config.policy, alpha),
            csv_path=None,
        )
        rows.extend(run_benchmark(cfg))
    return rows


def replace_policy_alpha(policy: StoppingPolicy, alpha: float) -> StoppingPolicy:
    return StoppingPolicy(
        delta0=policy.delta0,
        theta=policy.theta,
        alpha=alpha,
        rule=policy.rule,
        min_fit_samples=policy.min_fit_samples,
        y_limit=policy.y_limit,
    )
