"""Command-line front end: bench, estimate, attn-synth and cdf subcommands.

Exit codes: 0 success, 1 runtime failure (I/O, bad data), 2 configuration
error (argparse uses 2 for usage errors as well). Mutually required flags
are validated before any file is opened.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .attention import (
    load_attention_map,
    parse_synthetic_spec,
    save_attention_map,
    synthetic_attention,
)
from .bench import BenchConfig, run_benchmark
from .engines import build_engine
from .errors import ConfigError, VideoFormatError
from .frame import partition_into_blocks
from .metrics import write_cdf_tsv
from .stopping import FIT_FROM_DATA, RULE_SAD_THRESHOLD, StoppingPolicy
from .video_io import read_all_frames

_RULE_ALIASES = {
    "threshold": "sad_threshold",
    "sad_threshold": "sad_threshold",
    "empirical": "empirical_cdf",
    "empirical_cdf": "empirical_cdf",
}


def _default_jobs() -> int:
    env = os.environ.get("FASTME_JOBS")
    if env:
        try:
            return max(int(env), 1)
        except ValueError:
            raise ConfigError(f"FASTME_JOBS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _parse_theta(text: str) -> float | str:
    if text.strip().lower() == FIT_FROM_DATA:
        return FIT_FROM_DATA
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"--theta must be a number or 'fit', got {text!r}") from None


def _policy_from_args(args) -> StoppingPolicy:
    rule = _RULE_ALIASES.get(args.rule.strip().lower())
    if rule is None:
        raise ConfigError(
            f"--rule must be one of {sorted(_RULE_ALIASES)}, got {args.rule!r}"
        )
    return StoppingPolicy(
        delta0=args.delta0,
        theta=_parse_theta(args.theta),
        alpha=args.alpha,
        rule=rule,
        y_limit=args.y_limit,
    )


def _add_video_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="video file (Y4M or raw YUV)")
    p.add_argument("--format", dest="fmt", choices=["y4m", "420", "luma"],
                   default=None, help="input format (default: from extension)")
    p.add_argument("--width", type=int, default=None, help="raw input width")
    p.add_argument("--height", type=int, default=None, help="raw input height")


def _add_policy_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=0.7,
                   help="blend between distortion and saliency (fastme)")
    p.add_argument("--delta0", type=float, default=0.05,
                   help="base acceptable-miss probability")
    p.add_argument("--theta", default="1.0",
                   help="exponential rate, or 'fit' to estimate from data")
    p.add_argument("--rule", default=RULE_SAD_THRESHOLD,
                   help="stopping rule for the adaptive engine: "
                        "threshold | empirical")
    p.add_argument("--y-limit", type=float, default=None,
                   help="optional limiting value; warns when delta0 < 1 - limit")
    p.add_argument("--attn", default=None,
                   help="attention source: .attn.json file, directory of "
                        "per-frame files, or synthetic:<kind[:params]>")


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="seed for synthetic sources")
    p.add_argument("--jobs", type=int, default=None,
                   help="parallel block workers (default: cores, or $FASTME_JOBS)")


def _int_list(text: str, flag: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"{flag} wants a comma-separated integer list, got {text!r}") from None


def cmd_bench(args) -> int:
    policy = _policy_from_args(args)
    engines = tuple(e.strip() for e in args.engines.split(",") if e.strip())
    config = BenchConfig(
        input_path=args.input,
        engines=engines,
        frame_count=args.frames,
        fmt=args.fmt,
        width=args.width,
        height=args.height,
        block_sizes=_int_list(args.block_size, "--block-size"),
        search_ranges=_int_list(args.search_range, "--search-range"),
        policy=policy,
        attention=args.attn,
        repetitions=args.repetitions,
        seed=args.seed,
        jobs=args.jobs if args.jobs else _default_jobs(),
        csv_path=args.csv,
    )
    rows = run_benchmark(config)
    print(f"# {len(rows)} rows -> {args.csv}")
    for row in rows:
        print(row.csv_line())
    return 0


def cmd_estimate(args) -> int:
    policy = _policy_from_args(args)
    if args.frame < 0 or args.ref < 0:
        raise ConfigError("frame indices must be nonnegative")
    needed = max(args.frame, args.ref) + 1
    header, frames = read_all_frames(
        args.input, fmt=args.fmt, width=args.width, height=args.height, limit=needed
    )
    for name, idx in (("--frame", args.frame), ("--ref", args.ref)):
        if idx >= len(frames):
            raise RuntimeError(
                f"{name} index {idx} is out of range: {args.input} has only "
                f"{len(frames)} readable frame(s)"
            )
    current, reference = frames[args.frame], frames[args.ref]
    engine = build_engine(args.engine, block_size=args.block_size,
                          search_range=args.search_range, policy=policy)
    attention = None
    if args.attn:
        if str(args.attn).startswith("synthetic:"):
            grid = partition_into_blocks(current, args.block_size)
            kind, params = parse_synthetic_spec(str(args.attn).split(":", 1)[1])
            attention = synthetic_attention(
                kind, grid.cols, grid.rows, args.block_size, seed=args.seed, **params
            )
        else:
            attention = load_attention_map(args.attn)
    jobs = args.jobs if args.jobs else _default_jobs()
    field = engine.estimate_field(current, reference, attention=attention, jobs=jobs)

    payload = {
        "input": str(args.input),
        "frame": args.frame,
        "reference": args.ref,
        "engine": engine.name,
        "block_size": args.block_size,
        "search_range": args.search_range,
        "grid": {"cols": field.grid.cols, "rows": field.grid.rows},
        "vectors": field.vectors.tolist(),
        "min_sad": field.min_sad.tolist(),
        "comparisons": field.comparisons.tolist(),
        "stopping_step": [
            None if s < 0 else int(s) for s in field.stopping_step
        ],
        "threshold": [
            None if not (t == t) else float(t) for t in field.threshold  # NaN -> None
        ],
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def cmd_attn_synth(args) -> int:
    kind, params = parse_synthetic_spec(args.kind)
    amap = synthetic_attention(
        kind, args.cols, args.rows, args.block_size, seed=args.seed, **params
    )
    save_attention_map(amap, args.out)
    print(f"wrote {args.out} ({amap.cols}x{amap.rows}, source={amap.source})")
    return 0


def cmd_cdf(args) -> int:
    try:
        with open(args.input) as fh:
            values = [float(line) for line in fh if line.strip()]
    except ValueError as exc:
        raise ConfigError(f"--input must hold one number per line: {exc}") from None
    if not values:
        raise ConfigError(f"--input {args.input} holds no samples")
    quantiles = tuple(
        float(q) for q in str(args.quantiles).split(",") if q.strip()
    )
    write_cdf_tsv(args.out, values, quantiles)
    print(f"wrote {args.out} ({len(values)} samples, quantiles={list(quantiles)})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fastme",
        description="Block motion estimation with optimal-stopping early "
                    "termination and semantic attention guidance.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bench", help="run engines over a sequence and emit CSV")
    _add_video_flags(p)
    p.add_argument("--engines", default="fs,tss,ds,adaptive,fastme",
                   help="comma-separated engine list")
    p.add_argument("--frames", type=int, default=None, help="frame-count limit")
    p.add_argument("--block-size", default="16", help="comma list, e.g. 8,16,32")
    p.add_argument("--search-range", default="7", help="comma list, e.g. 7,15")
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--csv", default="bench.csv", help="output CSV path")
    _add_policy_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("estimate", help="estimate one motion field, write JSON")
    _add_video_flags(p)
    p.add_argument("--frame", type=int, required=True, help="current frame index")
    p.add_argument("--ref", type=int, default=None,
                   help="reference frame index (default: frame - 1)")
    p.add_argument("--engine", default="fs")
    p.add_argument("--block-size", type=int, default=16)
    p.add_argument("--search-range", type=int, default=7)
    p.add_argument("--out", default=None, help="JSON output path (default stdout)")
    _add_policy_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("attn-synth", help="generate a synthetic attention map")
    p.add_argument("--kind", required=True,
                   help="uniform[:c] | gaussian[:cx,cy,sigma] | checkerboard")
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--block-size", type=int, default=16)
    p.add_argument("--out", default="synthetic.attn.json")
    _add_common_flags(p)
    p.set_defaults(func=cmd_attn_synth)

    p = sub.add_parser("cdf", help="export empirical-CDF plot data from SAD samples")
    p.add_argument("--input", required=True, help="text file, one SAD per line")
    p.add_argument("--quantiles", default="0.1", help="comma list of quantiles")
    p.add_argument("--out", default="cdf.tsv", help="output TSV path")
    _add_common_flags(p)
    p.set_defaults(func=cmd_cdf)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "estimate" and args.ref is None:
        args.ref = args.frame - 1
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"fastme: configuration error: {exc}", file=sys.stderr)
        return 2
    except (VideoFormatError, OSError, RuntimeError, ValueError) as exc:
        print(f"fastme: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
