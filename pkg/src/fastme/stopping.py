"""Early-termination machinery for sequential block matching.

Two families of stopping rules are provided:

* empirical-CDF rule: stop at step k when the empirical CDF of the SADs
  observed so far satisfies F(Y_k) >= 1 - delta. Implemented exactly as the
  sequential procedure prints it, which means it fires on the *largest*
  observations (and trivially at k=1 where F=1).
* threshold rules: model SADs as Exponential(theta) and stop as soon as a
  value falls at or below T = -log(delta)/theta. The attention-modulated
  variant shrinks delta per block, delta_k = delta0 * (1 - A_k), and tests a
  blended cost against T_k = -log(delta_k)/theta.

Both interpretations of the sequential rule are kept behind the policy's
`rule` switch; the threshold form is the default.
"""

from __future__ import annotations

import bisect
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import ConfigError, DegenerateDataError

RULE_EMPIRICAL_CDF = "empirical_cdf"
RULE_SAD_THRESHOLD = "sad_threshold"
RULE_FASTME = "fastme"
RULES = (RULE_EMPIRICAL_CDF, RULE_SAD_THRESHOLD, RULE_FASTME)

FIT_FROM_DATA = "fit"
DEFAULT_BOOTSTRAP_THETA = 1.0

# A_k = 1 is clamped here so delta_k stays positive and the threshold finite.
ATTENTION_CLAMP = 1.0 - 1e-6

_FIXED_POINT_MAX_ITER = 10_000


class DeltaBoundWarning(UserWarning):
    """delta violates the configured lower bound 1 - y_limit."""


@dataclass
class StoppingPolicy:
    """Parameter bundle governing early termination.

    theta is either a positive rate or the string "fit", meaning the rate is
    re-estimated from the SADs observed on the previous frame pair (the first
    pair falls back to DEFAULT_BOOTSTRAP_THETA). For the attention-blended
    rule, rates and thresholds live in normalized SAD units (SAD / (255 b^2))
    so that alpha transfers across block sizes.
    """

    delta0: float = 0.05
    theta: float | str = 1.0
    alpha: float = 0.7
    rule: str = RULE_SAD_THRESHOLD
    min_fit_samples: int = 8
    y_limit: float | None = None

    def __post_init__(self):
        if not 0.0 < self.delta0 < 1.0:
            raise ConfigError(f"delta0 must lie in (0, 1), got {self.delta0}")
        if isinstance(self.theta, str):
            if self.theta != FIT_FROM_DATA:
                raise ConfigError(f"theta must be a positive rate or {FIT_FROM_DATA!r}")
        elif self.theta <= 0:
            raise ConfigError(f"theta must be positive, got {self.theta}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.rule not in RULES:
            raise ConfigError(f"rule must be one of {RULES}, got {self.rule!r}")
        if self.min_fit_samples < 1:
            raise ConfigError("min_fit_samples must be >= 1")
        if self.y_limit is not None:
            check_delta_bound(self.delta0, self.y_limit)

    @property
    def fits_theta(self) -> bool:
        return self.theta == FIT_FROM_DATA


class SadSampleSet:
    """Ordered multiset of observed SAD values with an incremental CDF.

    Values are kept both in observation order and in a sorted mirror; inserts
    are O(n) via bisect, which is cheap at per-block search sizes.
    """

    def __init__(self, values: Iterable[float] = ()):  # noqa: D107
        self._values: list[float] = []
        self._sorted: list[float] = []
        for v in values:
            self.add(v)

    def add(self, value: float) -> None:
        v = float(value)
        if v < 0:
            raise ValueError(f"SAD samples are nonnegative, got {v}")
        self._values.append(v)
        bisect.insort(self._sorted, v)

    def __len__(self) -> int:
        return len(self._values)

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self._values, dtype=np.float64)

    @property
    def sorted_values(self) -> np.ndarray:
        return np.asarray(self._sorted, dtype=np.float64)

    def mean(self) -> float:
        if not self._values:
            raise DegenerateDataError("empty sample set has no mean")
        return float(np.mean(self._values))

    def cdf(self, y: float) -> float:
        if not self._values:
            raise DegenerateDataError("empirical CDF of an empty sample set")
        return bisect.bisect_right(self._sorted, float(y)) / len(self._sorted)


def empirical_cdf(samples: SadSampleSet | Iterable[float], y: float) -> float:
    """F(y) = |{Y_i <= y}| / n over the observed values."""
    if not isinstance(samples, SadSampleSet):
        samples = SadSampleSet(samples)
    return samples.cdf(y)


def fit_exponential_rate(samples: SadSampleSet | Iterable[float]) -> float:
    """Maximum-likelihood rate for an exponential model: 1 / mean."""
    if not isinstance(samples, SadSampleSet):
        samples = SadSampleSet(samples)
    if len(samples) == 0:
        raise DegenerateDataError("cannot fit a rate to an empty sample set")
    mean = samples.mean()
    if mean <= 0.0:
        raise DegenerateDataError("all-zero SAD samples: exponential rate diverges")
    return 1.0 / mean


def sad_threshold(delta: float, theta: float) -> float:
    """T = -log(delta)/theta: stop once a value falls at or below T."""
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    if theta <= 0.0:
        raise ValueError(f"theta must be positive, got {theta}")
    return -math.log(delta) / theta


def adaptive_delta(delta0: float, attention_score: float) -> float:
    """delta_k = delta0 * (1 - A_k), with A_k clamped below 1 to stay positive."""
    if not 0.0 < delta0 < 1.0:
        raise ValueError(f"delta0 must lie in (0, 1), got {delta0}")
    a = min(max(float(attention_score), 0.0), ATTENTION_CLAMP)
    return delta0 * (1.0 - a)


def blended_cost(y_norm: float, attention_score: float, alpha: float) -> float:
    """Convex blend of normalized distortion and inverse saliency."""
    return alpha * y_norm + (1.0 - alpha) * (1.0 - attention_score)


def normalized_sad_scale(block_size: int) -> float:
    """Maximum possible SAD of a b x b block pair; divides raw SADs into [0, 1]."""
    return 255.0 * block_size * block_size


class FixedPointResult(NamedTuple):
    tau: float
    residual: float
    iterations: int


def fixed_point_tau(
    theta: float, tol: float = 1e-10, max_iter: int = _FIXED_POINT_MAX_ITER
) -> FixedPointResult:
    """Solves tau = (1 - exp(-theta tau)) / theta by damped iteration.

    The map is a contraction with derivative 1 at its unique fixed point 0,
    so plain iteration crawls; each step therefore extrapolates with the
    double-root Newton correction (clamped into [0, tau) to keep the iterates
    monotonically decreasing from tau0 = 1/theta). Iteration stops when the
    accepted update falls below tol.
    """
    if theta <= 0.0:
        raise ValueError(f"theta must be positive, got {theta}")
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")

    def g(t: float) -> float:
        return -math.expm1(-theta * t) / theta

    tau = 1.0 / theta
    for iteration in range(1, max_iter + 1):
        h = g(tau) - tau                    # residual of the map
        hp = math.expm1(-theta * tau)       # g'(tau) - 1
        new = tau - 2.0 * h / hp if hp != 0.0 else g(tau)
        if new < 0.0:
            new = 0.0  # overshot the root; 0 is the domain edge and the fixed point
        elif new >= tau:
            new = min(g(tau), tau)
        delta = tau - new
        tau = new
        if delta < tol:
            return FixedPointResult(tau=tau, residual=abs(g(tau) - tau),
                                    iterations=iteration)
    raise ArithmeticError(
        f"fixed-point iteration did not converge within {max_iter} steps"
    )


def should_stop_empirical(
    samples: SadSampleSet, y_k: float, delta: float
) -> bool:
    """Sequential empirical-CDF test; y_k must already be inserted in samples."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return samples.cdf(y_k) >= 1.0 - delta


def should_stop_fastme(
    y_tilde: float, t_k: float, y_k: float, y_min: float
) -> bool:
    """Blended-cost acceptance: cost within the boundary AND a new best SAD."""
    return y_tilde <= t_k and y_k < y_min


def check_delta_bound(delta: float, y_limit: float) -> bool:
    """Warns when delta < 1 - y_limit, the consistency bound for the rule.

    The limiting value y_limit is configuration-supplied; the bound is a
    sanity warning rather than a hard error.
    """
    if not 0.0 <= y_limit <= 1.0:
        raise ValueError(f"y_limit must lie in [0, 1], got {y_limit}")
    bound = 1.0 - y_limit
    if delta < bound - 1e-12:  # epsilon absorbs float noise at the boundary
        warnings.warn(
            f"delta={delta} is below the bound 1 - y_limit = {bound:.6g}; "
            "the stopping rule may terminate later than intended",
            DeltaBoundWarning,
            stacklevel=2,
        )
        return False
    return True
