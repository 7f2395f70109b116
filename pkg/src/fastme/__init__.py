"""Block motion estimation toolkit.

Five engines (exhaustive full search, three-step search, diamond search,
and two early-terminating variants driven by optimal-stopping rules, one of
them guided by per-block semantic attention), plus video ingestion, quality
metrics and a reproducible benchmark harness.
"""

from .attention import (
    AttentionMap,
    aggregate_to_blocks,
    load_attention_map,
    save_attention_map,
    synthetic_attention,
    top_fraction_mask,
)
from .bench import BenchConfig, BenchRow, run_benchmark
from .engines import (
    AdaptiveME,
    BlockMotionEstimator,
    DiamondSearch,
    FastME,
    FullSearch,
    SearchOutcome,
    StopDiagnostics,
    ThreeStepSearch,
    build_engine,
    estimate_motion_field,
)
from .frame import (
    BlockGrid,
    LumaPlane,
    MotionField,
    MotionVector,
    SearchParams,
    candidate_window,
    partition_into_blocks,
)
from .metrics import (
    motion_compensate,
    psnr,
    sad,
    semantic_coverage_score,
)
from .stopping import (
    SadSampleSet,
    StoppingPolicy,
    adaptive_delta,
    blended_cost,
    empirical_cdf,
    fit_exponential_rate,
    fixed_point_tau,
    sad_threshold,
    should_stop_empirical,
    should_stop_fastme,
)
from .video_io import VideoHeader, read_raw_yuv, read_y4m, write_raw_luma, write_y4m

__version__ = "0.1.0"

__all__ = [
    "AdaptiveME",
    "AttentionMap",
    "BenchConfig",
    "BenchRow",
    "BlockGrid",
    "BlockMotionEstimator",
    "DiamondSearch",
    "FastME",
    "FullSearch",
    "LumaPlane",
    "MotionField",
    "MotionVector",
    "SadSampleSet",
    "SearchOutcome",
    "SearchParams",
    "StopDiagnostics",
    "StoppingPolicy",
    "ThreeStepSearch",
    "VideoHeader",
    "adaptive_delta",
    "aggregate_to_blocks",
    "blended_cost",
    "build_engine",
    "candidate_window",
    "empirical_cdf",
    "estimate_motion_field",
    "fit_exponential_rate",
    "fixed_point_tau",
    "load_attention_map",
    "motion_compensate",
    "partition_into_blocks",
    "psnr",
    "read_raw_yuv",
    "read_y4m",
    "run_benchmark",
    "sad",
    "sad_threshold",
    "save_attention_map",
    "semantic_coverage_score",
    "should_stop_empirical",
    "should_stop_fastme",
    "synthetic_attention",
    "top_fraction_mask",
    "write_raw_luma",
    "write_y4m",
]
