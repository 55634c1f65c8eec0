"""Monte Carlo checks of the split-sample Studentized rejection rule.

Per null, n observations form a mean and a further m pairs form the scale
estimate S^2 = (1/2m) sum (Y_{2k-1} - Y_{2k})^2; the null is rejected when
the mean reaches z * S.  Two estimators are provided:

  * simulate_pfdr draws whole batches of nulls, a fraction pi of them
    carrying the effect, and averages V/R over batches that reject at all
    (the quantity pFDR is the expectation of);
  * tail_ratio_mc estimates the ratio of the rejection probability under a
    mean shift d = T/N to the one under the null, on common random numbers,
    which is the finite-sample quantity whose large-N growth the planners'
    rate formulas describe.

Streams are counter-based and keyed by (seed, block index), so results are
bit-identical across repeat runs and across thread counts; the thread pool
size comes from the PFDR_SIZER_THREADS environment variable.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .ldp_engine import CgfModel, EULER_GAMMA, legendre

__all__ = [
    "ThresholdSchedule",
    "SimScenario",
    "PfdrSimResult",
    "TailRatioResult",
    "DegenerateScenarioError",
    "InsufficientHitsError",
    "simulate_pfdr",
    "tail_ratio_mc",
    "bahadur_rao_tail",
    "THREADS_ENV_VAR",
    "SHIFT_FAMILIES",
    "SCORE_FAMILIES",
]

THREADS_ENV_VAR = "PFDR_SIZER_THREADS"

SHIFT_FAMILIES = ("normal", "uniform", "gamma")
SCORE_FAMILIES = ("normal-score", "cauchy-score", "gamma-score")

# trials per RNG block; fixed so the stream layout (hence the result) does
# not depend on how many threads execute the blocks
_TAIL_BLOCK = 16_384

DEFAULT_BATCH_NULLS = 10_000


class DegenerateScenarioError(RuntimeError):
    """No batch produced a rejection, so V/R has no observations."""

    def __init__(self, batches: int, total_nulls: int):
        self.batches = batches
        self.total_nulls = total_nulls
        self.reject_rate_bound = 1.0 / max(total_nulls, 1)
        super().__init__(
            f"no rejections in {batches} batches ({total_nulls} nulls); "
            f"per-null rejection probability is below about {self.reject_rate_bound:.3g}; "
            "lower the threshold or increase the sample size"
        )


class InsufficientHitsError(RuntimeError):
    """Too few tail events on one side of the ratio for a stable estimate."""

    def __init__(self, hits_num: int, hits_den: int, trials: int, min_hits: int):
        self.hits_num = hits_num
        self.hits_den = hits_den
        self.trials = trials
        self.min_hits = min_hits
        super().__init__(
            f"tail ratio needs at least {min_hits} hits on each side, got "
            f"numerator {hits_num} and denominator {hits_den} in {trials} trials"
        )


@dataclass(frozen=True)
class ThresholdSchedule:
    """Rejection threshold z as a function of the total per-null size N.

    kind "fixed" uses z0 for every N; kind "loglog" grows it as
    z0 * ln(1 + ln(1 + N)), slow enough that the rate formulas keep their
    form while the threshold still drifts upward.
    """

    kind: str = "fixed"
    z0: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("fixed", "loglog"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if not self.z0 > 0.0:
            raise ValueError(f"z0 must be positive, got {self.z0!r}")

    def z_at(self, n_total: int) -> float:
        if self.kind == "fixed":
            return self.z0
        return self.z0 * math.log1p(math.log1p(float(n_total)))


@dataclass(frozen=True)
class SimScenario:
    """One simulation setup: family, effect, mixture weight pi, and sizes.

    n observations feed the mean and m pairs feed the scale; the planning
    size is N = n + m, which is what the threshold schedule sees.  For shift
    families the effect adds to the data mean; for score families it is the
    location shift of the underlying observation, pushed through the score
    transform.  trials counts batches for simulate_pfdr and individual
    statistics for tail_ratio_mc.
    """

    family: str
    effect: float
    pi: float
    n: int
    m: int
    schedule: ThresholdSchedule
    trials: int
    seed: int = 0
    params: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.family not in SHIFT_FAMILIES + SCORE_FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if not self.effect >= 0.0:
            raise ValueError(f"effect must be >= 0, got {self.effect!r}")
        if not 0.0 <= self.pi <= 1.0:
            raise ValueError(f"pi must be in [0, 1], got {self.pi!r}")
        if self.n < 1 or self.m < 1:
            raise ValueError(f"need n >= 1 and m >= 1, got n={self.n}, m={self.m}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials!r}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed!r}")
        if self.family == "gamma" and "shape" not in self.params:
            raise ValueError("gamma family requires params['shape']")


@dataclass(frozen=True)
class PfdrSimResult:
    pfdr_hat: float
    stderr: float
    batches: int
    batches_with_rejection: int
    rejections: int
    false_rejections: int
    reject_rate: float


@dataclass(frozen=True)
class TailRatioResult:
    ratio_hat: float
    stderr: float
    hits_num: int
    hits_den: int
    hits_joint: int
    trials: int


def _rng_for(seed: int, block: int) -> np.random.Generator:
    key = np.array([seed, block], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _pair_scale(obs: np.ndarray) -> np.ndarray:
    # S = sqrt((1/2m) sum over pairs of squared differences)
    d = obs[:, 0::2] - obs[:, 1::2]
    return np.sqrt(0.5 * np.mean(d * d, axis=1))


def _stat_pair(
    rng: np.random.Generator,
    family: str,
    params: dict[str, float],
    size: int,
    n: int,
    m: int,
    effect: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Draw size statistics; return (xbar0, s0, xbar1, s1).

    The 0-parts are under the true null, the 1-parts are the same underlying
    draws with the effect applied (common random numbers).  For shift
    families s1 is s0 itself: pair differences cancel a mean shift.
    """
    if family in SHIFT_FAMILIES:
        if family == "normal":
            sigma = params.get("sigma", 1.0)
            xbar0 = sigma * rng.standard_normal((size, n)).mean(axis=1)
            s0 = sigma * _pair_scale(rng.standard_normal((size, 2 * m)))
        elif family == "uniform":
            width = params.get("width", 1.0)
            xbar0 = width * (rng.random((size, n)) - 0.5).mean(axis=1)
            s0 = width * _pair_scale(rng.random((size, 2 * m)))
        else:
            shape = params["shape"]
            scale = params.get("scale", 1.0)
            xbar0 = scale * (rng.standard_gamma(shape, (size, n)) - shape).mean(axis=1)
            s0 = scale * _pair_scale(rng.standard_gamma(shape, (size, 2 * m)))
        return xbar0, s0, xbar0 + effect, s0

    if family == "normal-score":
        sigma = params.get("sigma", 1.0)
        xbar0 = rng.standard_normal((size, n)).mean(axis=1) / sigma
        s0 = _pair_scale(rng.standard_normal((size, 2 * m))) / sigma
        return xbar0, s0, xbar0 + effect / (sigma * sigma), s0

    if family == "cauchy-score":
        w = rng.standard_cauchy((size, n))
        xbar0 = _cauchy_score(w).mean(axis=1)
        xbar1 = _cauchy_score(w + effect).mean(axis=1)
        w2 = rng.standard_cauchy((size, 2 * m))
        s0 = _pair_scale(_cauchy_score(w2))
        s1 = _pair_scale(_cauchy_score(w2 + effect))
        return xbar0, s0, xbar1, s1

    # gamma-score: unit-rate exponential data; a location shift of size
    # theta adds an independent Gamma(theta) by shape additivity
    w = rng.standard_exponential((size, n))
    g = rng.standard_gamma(effect, (size, n)) if effect > 0.0 else 0.0
    xbar0 = (np.log(w) + EULER_GAMMA).mean(axis=1)
    xbar1 = (np.log(w + g) + EULER_GAMMA).mean(axis=1)
    w2 = rng.standard_exponential((size, 2 * m))
    g2 = rng.standard_gamma(effect, (size, 2 * m)) if effect > 0.0 else 0.0
    s0 = _pair_scale(np.log(w2) + EULER_GAMMA)
    s1 = _pair_scale(np.log(w2 + g2) + EULER_GAMMA)
    return xbar0, s0, xbar1, s1


def _cauchy_score(w: np.ndarray) -> np.ndarray:
    return 2.0 * w / (1.0 + w * w)


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None or raw.strip() == "":
        return 1
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(
            f"{THREADS_ENV_VAR} must be a positive integer, got {raw!r}"
        ) from exc
    if value < 1:
        raise ValueError(f"{THREADS_ENV_VAR} must be a positive integer, got {raw!r}")
    return value


def _run_blocks(fn: Callable[[int], tuple], blocks: Iterable[int]) -> list[tuple]:
    threads = _thread_count()
    indices = list(blocks)
    if threads == 1:
        return [fn(b) for b in indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # map preserves submission order, so reductions are deterministic
        return list(pool.map(fn, indices))


def simulate_pfdr(
    scenario: SimScenario, batch_nulls: int = DEFAULT_BATCH_NULLS
) -> PfdrSimResult:
    """Estimate pFDR = E[V/R | R > 0] by batch means.

    Each of scenario.trials batches draws batch_nulls independent nulls,
    flags each as false with probability pi, applies the effect to the
    false ones, and rejects by the Studentized rule.  The estimate is the
    mean of V/R over batches with R > 0, with its standard error across
    batches.
    """
    if batch_nulls < 1:
        raise ValueError(f"batch_nulls must be >= 1, got {batch_nulls!r}")
    z = scenario.schedule.z_at(scenario.n + scenario.m)
    fam, params = scenario.family, scenario.params
    n, m, effect = scenario.n, scenario.m, scenario.effect

    def one_batch(idx: int) -> tuple[int, int]:
        rng = _rng_for(scenario.seed, idx)
        theta = rng.random(batch_nulls) < scenario.pi
        xbar0, s0, xbar1, s1 = _stat_pair(rng, fam, params, batch_nulls, n, m, effect)
        xbar = np.where(theta, xbar1, xbar0)
        s = np.where(theta, s1, s0)
        reject = xbar >= z * s
        r = int(np.count_nonzero(reject))
        v = int(np.count_nonzero(reject & ~theta))
        return v, r

    counts = _run_blocks(one_batch, range(scenario.trials))
    ratios = np.array([v / r for v, r in counts if r > 0], dtype=float)
    total_v = sum(v for v, _ in counts)
    total_r = sum(r for _, r in counts)
    total_nulls = scenario.trials * batch_nulls
    if ratios.size == 0:
        raise DegenerateScenarioError(scenario.trials, total_nulls)
    pfdr_hat = float(ratios.mean())
    if ratios.size >= 2:
        stderr = float(ratios.std(ddof=1) / math.sqrt(ratios.size))
    else:
        stderr = math.inf
    return PfdrSimResult(
        pfdr_hat=pfdr_hat,
        stderr=stderr,
        batches=scenario.trials,
        batches_with_rejection=int(ratios.size),
        rejections=total_r,
        false_rejections=total_v,
        reject_rate=total_r / total_nulls,
    )


def tail_ratio_mc(
    scenario: SimScenario, t_target: float, min_hits: int = 100
) -> TailRatioResult:
    """Ratio of shifted to null rejection probability at threshold growth T.

    The shift is d = t_target / N with N = n + m; numerator and denominator
    events are evaluated on the same draws, so the ratio estimate is far
    tighter than two independent tail estimates would be.  The standard
    error comes from the delta method with the joint hit count supplying
    the covariance.
    """
    if not t_target >= 0.0:
        raise ValueError(f"t_target must be >= 0, got {t_target!r}")
    n_total = scenario.n + scenario.m
    d = t_target / n_total
    z = scenario.schedule.z_at(n_total)
    fam, params = scenario.family, scenario.params
    n, m = scenario.n, scenario.m
    trials = scenario.trials

    n_blocks = (trials + _TAIL_BLOCK - 1) // _TAIL_BLOCK

    def one_block(idx: int) -> tuple[int, int, int]:
        size = min(_TAIL_BLOCK, trials - idx * _TAIL_BLOCK)
        rng = _rng_for(scenario.seed, idx)
        xbar0, s0, xbar1, s1 = _stat_pair(rng, fam, params, size, n, m, d)
        hit_num = xbar1 >= z * s1
        hit_den = xbar0 >= z * s0
        return (
            int(np.count_nonzero(hit_num)),
            int(np.count_nonzero(hit_den)),
            int(np.count_nonzero(hit_num & hit_den)),
        )

    counts = _run_blocks(one_block, range(n_blocks))
    hits_num = sum(c[0] for c in counts)
    hits_den = sum(c[1] for c in counts)
    hits_joint = sum(c[2] for c in counts)
    if hits_num < min_hits or hits_den < min_hits:
        raise InsufficientHitsError(hits_num, hits_den, trials, min_hits)

    ratio = hits_num / hits_den
    if hits_num == hits_den == hits_joint:
        # identical event sets (e.g. t_target = 0): the ratio is exact
        stderr = 0.0
    else:
        p_num = hits_num / trials
        p_den = hits_den / trials
        p_joint = hits_joint / trials
        var = (
            p_num * (1.0 - p_num) / p_den**2
            - 2.0 * p_num * (p_joint - p_num * p_den) / p_den**3
            + p_num**2 * (1.0 - p_den) / p_den**3
        )
        stderr = math.sqrt(max(var, 0.0) / trials)
    return TailRatioResult(
        ratio_hat=ratio,
        stderr=stderr,
        hits_num=hits_num,
        hits_den=hits_den,
        hits_joint=hits_joint,
        trials=trials,
    )


def bahadur_rao_tail(cgf: CgfModel, u: float, n: int) -> float:
    """Sharp tail approximation P(mean of n >= u) for a centered cgf.

    exp(-n rate) / (eta sqrt(2 pi n curvature)) with (rate, eta) from the
    slope-u Legendre transform.  Only meaningful when the tail is actually
    small; slopes so close to 0 that the correction factor reaches 1 raise
    ValueError rather than returning a vacuous number.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    if not u > 0.0:
        raise ValueError(f"u must be positive, got {u!r}")
    rate, eta = legendre(cgf, u)
    denom = eta * math.sqrt(2.0 * math.pi * n * cgf.lambda_d2(eta))
    if denom < 1.0:
        raise ValueError(
            f"u = {u!r} is too close to 0 at n = {n}: the tail is not in the "
            "large-deviation regime (need roughly u > sd / sqrt(n))"
        )
    return math.exp(-n * rate) / denom
