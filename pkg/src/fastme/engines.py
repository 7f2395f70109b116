"""The five block-matching engines over a shared per-block search loop.

Engines are scikit-learn style estimators: hyperparameters are constructor
arguments (so `get_params`/`set_params`/`clone` work for parameter sweeps)
and the data-dependent exponential rate learned by `fit` lands in `rate_`.
The frame-pair verb is `estimate_field`, which maps two frames to a
MotionField; it is deterministic for fixed inputs and parameters.

Candidate evaluation order for the exhaustive-walk engines (FS, Adaptive,
FAST) is center-outward by increasing |dx|+|dy| with raster tie order; the
order is part of the determinism contract and makes the zero-motion case
stop at the first candidate. Comparison counts equal the number of distinct
SAD evaluations actually performed (a per-block position cache prevents
double counting in the pattern engines).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from sklearn.base import BaseEstimator

from . import metrics
from .attention import AttentionMap
from .errors import ConfigError
from .frame import (
    LumaPlane,
    MotionField,
    MotionVector,
    center_outward_order,
    partition_into_blocks,
    window_bounds,
)
from .stopping import (
    DEFAULT_BOOTSTRAP_THETA,
    FIT_FROM_DATA,
    RULE_EMPIRICAL_CDF,
    RULE_FASTME,
    RULE_SAD_THRESHOLD,
    SadSampleSet,
    StoppingPolicy,
    adaptive_delta,
    blended_cost,
    normalized_sad_scale,
    sad_threshold,
)
from .validation import (
    check_attention_grid,
    check_block_size,
    check_luma,
    check_same_dims,
    check_search_range,
)

LDSP_OFFSETS = (  # large diamond, center first then raster order
    (0, 0), (0, -2), (-1, -1), (1, -1), (-2, 0), (2, 0), (-1, 1), (1, 1), (0, 2),
)
SDSP_OFFSETS = ((0, -1), (-1, 0), (1, 0), (0, 1))  # small diamond, minus center


@dataclass(frozen=True)
class StopDiagnostics:
    stopped_early: bool = False
    stopping_step: int | None = None  # 1-based candidate index of the stop
    threshold: float | None = None    # T (raw SAD) or T_k (blended units)
    cdf_at_stop: float | None = None
    iteration_capped: bool = False    # diamond-search oscillation guard fired

    def __post_init__(self):
        if self.stopped_early and (self.stopping_step is None or self.stopping_step < 1):
            raise ValueError("stopped_early requires a stopping_step >= 1")


@dataclass(frozen=True)
class SearchOutcome:
    vector: MotionVector
    min_sad: int
    comparisons: int
    diagnostics: StopDiagnostics


class _BlockEvaluator:
    """SAD evaluation for one block, with position caching and exact counting."""

    __slots__ = ("ref", "ox", "oy", "b", "bounds", "block_i32", "count",
                 "_cache", "observed")

    def __init__(self, current: np.ndarray, reference: np.ndarray,
                 origin: tuple[int, int], block_size: int,
                 bounds: tuple[int, int, int, int]):
        self.ox, self.oy = origin
        self.b = block_size
        self.ref = reference
        self.bounds = bounds
        self.block_i32 = current[
            self.oy : self.oy + block_size, self.ox : self.ox + block_size
        ].astype(np.int32)
        self.count = 0
        self._cache: dict[tuple[int, int], int] = {}
        self.observed: list[int] = []

    def in_bounds(self, dx: int, dy: int) -> bool:
        dx_lo, dx_hi, dy_lo, dy_hi = self.bounds
        return dx_lo <= dx <= dx_hi and dy_lo <= dy <= dy_hi

    def sad(self, dx: int, dy: int) -> int:
        key = (dx, dy)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        x = self.ox + dx
        y = self.oy + dy
        patch = self.ref[y : y + self.b, x : x + self.b]
        value = metrics.block_sad(self.block_i32, patch)
        self._cache[key] = value
        self.count += 1
        self.observed.append(value)
        return value

    def sad_rectangle(self) -> np.ndarray:
        """Evaluates every candidate of the window in one vectorized batch.

        Returns values indexed [dy - dy_lo, dx - dx_lo]. Only valid as the
        first evaluation of the block (the cache must be empty so the count
        stays exact).
        """
        assert not self._cache, "batch evaluation must run before scalar lookups"
        dx_lo, dx_hi, dy_lo, dy_hi = self.bounds
        area = self.ref[
            self.oy + dy_lo : self.oy + dy_hi + self.b,
            self.ox + dx_lo : self.ox + dx_hi + self.b,
        ]
        windows = sliding_window_view(area, (self.b, self.b))
        values = metrics.block_sad_batch(self.block_i32, windows)
        self.count += values.size
        return values


class BlockMotionEstimator(BaseEstimator):
    """Base class wiring validation, the per-block loop and field assembly."""

    name = "base"
    _needs_attention = False
    _collects_samples = False

    def __init__(self, block_size: int = 16, search_range: int = 7):
        self.block_size = block_size
        self.search_range = search_range

    def fit(self, X=None, y=None):
        """Baseline engines have nothing to learn; kept for estimator parity."""
        return self

    def estimate_field(
        self,
        current: LumaPlane,
        reference: LumaPlane,
        attention: AttentionMap | None = None,
        jobs: int = 1,
    ) -> MotionField:
        check_luma(current, "current")
        check_luma(reference, "reference")
        check_same_dims(current, reference)
        b = check_block_size(self.block_size)
        p = check_search_range(self.search_range)
        grid = partition_into_blocks(current, b)
        if self._needs_attention:
            check_attention_grid(attention, grid)

        cur = current.data
        ref = reference.data
        n = grid.num_blocks

        def search(k: int) -> tuple[SearchOutcome, list[int]]:
            origin = grid.origin_of(k)
            bounds = window_bounds(origin, b, p, grid.frame_width, grid.frame_height)
            ev = _BlockEvaluator(cur, ref, origin, b, bounds)
            return self._search_block(ev, k, attention), ev.observed

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(search, range(n)))
        else:
            results = [search(k) for k in range(n)]
        outcomes = [r[0] for r in results]
        if self._collects_samples:
            # Observed SADs in block order, for chaining fit() across pairs.
            self.sad_samples_ = np.asarray(
                [v for _, obs in results for v in obs], dtype=np.float64
            )

        vectors = np.array([o.vector for o in outcomes], dtype=np.int32)
        min_sad = np.array([o.min_sad for o in outcomes], dtype=np.int64)
        comparisons = np.array([o.comparisons for o in outcomes], dtype=np.int64)
        stopping_step = np.array(
            [o.diagnostics.stopping_step if o.diagnostics.stopped_early else -1
             for o in outcomes],
            dtype=np.int64,
        )
        threshold = np.array(
            [math.nan if o.diagnostics.threshold is None else o.diagnostics.threshold
             for o in outcomes],
            dtype=np.float64,
        )
        return MotionField(
            grid=grid,
            vectors=vectors,
            min_sad=min_sad,
            comparisons=comparisons,
            stopping_step=stopping_step,
            threshold=threshold,
        )

    def _search_block(
        self, ev: _BlockEvaluator, block_index: int, attention: AttentionMap | None
    ) -> SearchOutcome:
        raise NotImplementedError


class FullSearch(BlockMotionEstimator):
    """Exhaustive evaluation of every candidate in the clamped window."""

    name = "fs"

    def _search_block(self, ev, block_index, attention):
        order = center_outward_order(ev.bounds)
        values = ev.sad_rectangle()
        dx_lo, _, dy_lo, _ = ev.bounds
        cols = np.fromiter((d.dx - dx_lo for d in order), dtype=np.intp, count=len(order))
        rows = np.fromiter((d.dy - dy_lo for d in order), dtype=np.intp, count=len(order))
        ordered = values[rows, cols]
        best = int(np.argmin(ordered))  # first occurrence = smallest |dx|+|dy|, raster
        return SearchOutcome(
            vector=order[best],
            min_sad=int(ordered[best]),
            comparisons=int(values.size),
            diagnostics=StopDiagnostics(),
        )


class ThreeStepSearch(BlockMotionEstimator):
    """Coarse-to-fine ladder: 9 points at step S, recenter, halve until S=1."""

    name = "tss"

    def _search_block(self, ev, block_index, attention):
        p = self.search_range
        step = 2 ** max(math.ceil(math.log2(p + 1)) - 1, 0)
        cx = cy = 0
        best_sad = ev.sad(0, 0)
        best_vec = MotionVector(0, 0)
        while step >= 1:
            for ody in (-step, 0, step):
                for odx in (-step, 0, step):
                    if odx == 0 and ody == 0:
                        continue
                    dx, dy = cx + odx, cy + ody
                    if not ev.in_bounds(dx, dy):
                        continue
                    v = ev.sad(dx, dy)
                    if v < best_sad:
                        best_sad, best_vec = v, MotionVector(dx, dy)
            cx, cy = best_vec
            step //= 2
        return SearchOutcome(
            vector=best_vec,
            min_sad=best_sad,
            comparisons=ev.count,
            diagnostics=StopDiagnostics(),
        )


class DiamondSearch(BlockMotionEstimator):
    """Large-diamond walk that shrinks to the small diamond at a local center."""

    name = "ds"

    def _search_block(self, ev, block_index, attention):
        cx = cy = 0
        best_sad = None
        best_vec = MotionVector(0, 0)
        capped = False
        max_recenters = 4 * self.search_range
        recenters = 0
        while True:
            for odx, ody in LDSP_OFFSETS:
                dx, dy = cx + odx, cy + ody
                if not ev.in_bounds(dx, dy):
                    continue
                v = ev.sad(dx, dy)
                if best_sad is None or v < best_sad:
                    best_sad, best_vec = v, MotionVector(dx, dy)
            if best_vec == (cx, cy):
                break
            recenters += 1
            if recenters > max_recenters:
                capped = True  # oscillation guard; return best seen so far
                break
            cx, cy = best_vec
        if not capped:
            for odx, ody in SDSP_OFFSETS:
                dx, dy = cx + odx, cy + ody
                if not ev.in_bounds(dx, dy):
                    continue
                v = ev.sad(dx, dy)
                if v < best_sad:
                    best_sad, best_vec = v, MotionVector(dx, dy)
        return SearchOutcome(
            vector=best_vec,
            min_sad=best_sad,
            comparisons=ev.count,
            diagnostics=StopDiagnostics(iteration_capped=capped),
        )


class AdaptiveME(BlockMotionEstimator):
    """Full-search walk with an optimal-stopping early exit.

    rule "sad_threshold" stops at the first SAD at or below -log(delta0)/theta
    (raw SAD units); rule "empirical_cdf" runs the sequential empirical-CDF
    test, which by construction fires at step 1. Without a trigger the walk
    degenerates to full search. theta="fit" uses the rate learned by `fit`
    from the previous frame pair's observed SADs (bootstrap: 1.0).
    """

    name = "adaptive"
    _collects_samples = True

    def __init__(
        self,
        block_size: int = 16,
        search_range: int = 7,
        delta0: float = 0.05,
        theta: float | str = FIT_FROM_DATA,
        rule: str = RULE_SAD_THRESHOLD,
        min_fit_samples: int = 8,
    ):
        super().__init__(block_size=block_size, search_range=search_range)
        self.delta0 = delta0
        self.theta = theta
        self.rule = rule
        self.min_fit_samples = min_fit_samples

    def _check_policy(self) -> None:
        if self.rule not in (RULE_SAD_THRESHOLD, RULE_EMPIRICAL_CDF):
            raise ConfigError(
                f"adaptive engine rule must be {RULE_SAD_THRESHOLD!r} or "
                f"{RULE_EMPIRICAL_CDF!r}, got {self.rule!r}"
            )
        if not 0.0 < self.delta0 < 1.0:
            raise ConfigError(f"delta0 must lie in (0, 1), got {self.delta0}")

    # SADs are fed back in raw units for this engine.
    def _sample_scale(self) -> float:
        return 1.0

    def fit(self, X, y=None):
        """Refits the exponential rate from observed SADs (MLE, 1/mean).

        Fewer than min_fit_samples samples, or a zero mean, leave the
        configured rate in force.
        """
        samples = np.asarray(X, dtype=np.float64).ravel()
        if samples.size >= self.min_fit_samples:
            mean = float(samples.mean()) / self._sample_scale()
            if mean > 0.0:
                self.rate_ = 1.0 / mean
        return self

    def effective_theta(self) -> float:
        rate = getattr(self, "rate_", None)
        if rate is not None:
            return rate
        if self.theta == FIT_FROM_DATA:
            return DEFAULT_BOOTSTRAP_THETA
        return float(self.theta)

    def _search_block(self, ev, block_index, attention):
        self._check_policy()
        order = center_outward_order(ev.bounds)
        if self.rule == RULE_SAD_THRESHOLD:
            threshold = sad_threshold(self.delta0, self.effective_theta())
            best_vec = best_sad = None
            for step, (dx, dy) in enumerate(order, start=1):
                v = ev.sad(dx, dy)
                if best_sad is None or v < best_sad:
                    best_sad, best_vec = v, MotionVector(dx, dy)
                if v <= threshold:
                    return SearchOutcome(
                        vector=best_vec,
                        min_sad=best_sad,
                        comparisons=ev.count,
                        diagnostics=StopDiagnostics(
                            stopped_early=True,
                            stopping_step=step,
                            threshold=threshold,
                        ),
                    )
            return SearchOutcome(
                vector=best_vec,
                min_sad=best_sad,
                comparisons=ev.count,
                diagnostics=StopDiagnostics(threshold=threshold),
            )

        samples = SadSampleSet()
        cut = 1.0 - self.delta0
        best_vec = best_sad = None
        for step, (dx, dy) in enumerate(order, start=1):
            v = ev.sad(dx, dy)
            if best_sad is None or v < best_sad:
                best_sad, best_vec = v, MotionVector(dx, dy)
            samples.add(v)  # insertion precedes the CDF test
            cdf = samples.cdf(v)
            if cdf >= cut:
                return SearchOutcome(
                    vector=best_vec,
                    min_sad=best_sad,
                    comparisons=ev.count,
                    diagnostics=StopDiagnostics(
                        stopped_early=True,
                        stopping_step=step,
                        cdf_at_stop=cdf,
                    ),
                )
        return SearchOutcome(
            vector=best_vec,
            min_sad=best_sad,
            comparisons=ev.count,
            diagnostics=StopDiagnostics(),
        )

class FastME(AdaptiveME):
    """Semantic-aware stopping: blended cost against an attention-scaled boundary.

    Per candidate, the raw SAD is normalized to [0, 1] by 255 b^2, blended
    with the block's inverse attention, and accepted when the blend falls
    within T_k = -log(delta0 (1 - A_k)) / theta and the raw SAD strictly
    improves on the best seen. theta (fixed or fitted) lives in normalized
    units for this engine so alpha transfers across block sizes.
    """

    name = "fastme"
    _needs_attention = True

    def __init__(
        self,
        block_size: int = 16,
        search_range: int = 7,
        delta0: float = 0.05,
        theta: float | str = 1.0,
        alpha: float = 0.7,
        min_fit_samples: int = 8,
    ):
        super().__init__(
            block_size=block_size,
            search_range=search_range,
            delta0=delta0,
            theta=theta,
            rule=RULE_FASTME,
            min_fit_samples=min_fit_samples,
        )
        self.alpha = alpha

    def _check_policy(self) -> None:
        if not 0.0 < self.delta0 < 1.0:
            raise ConfigError(f"delta0 must lie in (0, 1), got {self.delta0}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")

    def _sample_scale(self) -> float:
        return normalized_sad_scale(self.block_size)

    def _search_block(self, ev, block_index, attention):
        self._check_policy()
        scale = normalized_sad_scale(self.block_size)
        a_k = attention.score_of(block_index)  # one score per source block
        t_k = sad_threshold(adaptive_delta(self.delta0, a_k), self.effective_theta())
        order = center_outward_order(ev.bounds)
        best_vec = None
        best_sad = math.inf
        for step, (dx, dy) in enumerate(order, start=1):
            v = ev.sad(dx, dy)
            y_tilde = blended_cost(v / scale, a_k, self.alpha)
            accept = y_tilde <= t_k and v < best_sad
            if v < best_sad:
                best_sad, best_vec = v, MotionVector(dx, dy)
            if accept:
                return SearchOutcome(
                    vector=best_vec,
                    min_sad=int(best_sad),
                    comparisons=ev.count,
                    diagnostics=StopDiagnostics(
                        stopped_early=True,
                        stopping_step=step,
                        threshold=t_k,
                    ),
                )
        return SearchOutcome(
            vector=best_vec,
            min_sad=int(best_sad),
            comparisons=ev.count,
            diagnostics=StopDiagnostics(threshold=t_k),
        )


ENGINE_CLASSES = {
    cls.name: cls
    for cls in (FullSearch, ThreeStepSearch, DiamondSearch, AdaptiveME, FastME)
}
_ENGINE_ALIASES = {
    "fs": "fs", "full": "fs", "full_search": "fs",
    "tss": "tss", "three_step": "tss", "three_step_search": "tss",
    "ds": "ds", "diamond": "ds", "diamond_search": "ds",
    "adaptive": "adaptive", "adaptive_me": "adaptive", "ame": "adaptive",
    "fastme": "fastme", "fast_me": "fastme", "fm": "fastme",
}


def build_engine(
    name: str,
    block_size: int = 16,
    search_range: int = 7,
    policy: StoppingPolicy | None = None,
) -> BlockMotionEstimator:
    """Engine factory used by the bench and CLI layers."""
    key = _ENGINE_ALIASES.get(name.strip().lower())
    if key is None:
        raise ConfigError(
            f"unknown engine {name!r}; expected one of {sorted(ENGINE_CLASSES)}"
        )
    if key == "adaptive":
        policy = policy or StoppingPolicy()
        return AdaptiveME(
            block_size=block_size,
            search_range=search_range,
            delta0=policy.delta0,
            theta=policy.theta,
            rule=policy.rule if policy.rule != RULE_FASTME else RULE_SAD_THRESHOLD,
            min_fit_samples=policy.min_fit_samples,
        )
    if key == "fastme":
        policy = policy or StoppingPolicy()
        return FastME(
            block_size=block_size,
            search_range=search_range,
            delta0=policy.delta0,
            theta=policy.theta,
            alpha=policy.alpha,
            min_fit_samples=policy.min_fit_samples,
        )
    return ENGINE_CLASSES[key](block_size=block_size, search_range=search_range)


def estimate_motion_field(
    current: LumaPlane,
    reference: LumaPlane,
    engine: BlockMotionEstimator,
    attention: AttentionMap | None = None,
    jobs: int = 1,
) -> MotionField:
    """Runs `engine` on every grid block of the frame pair."""
    return engine.estimate_field(current, reference, attention=attention, jobs=jobs)
