"""Rate-function machinery for general data distributions.

The split-sample Studentized rule rejects when the mean of n observations
exceeds z times a scale estimate built from a further m paired observations
(rho = m / N is the fraction spent on the scale).  For data whose centered
log moment generating function is Lambda, the exponential rate at which the
density-ratio supremum grows is governed by the unique positive root t0 of

    t * Lambda'(t) = (1 + lambda) * rho / (1 - rho),

where lambda is the tail index of the paired-difference density at zero
(lambda = 0 whenever that density is positive and finite at the origin).
The minimum total sample size to reach the ratio level Q at mean shift d is
then

    N ~ ln(Q) / (d * (1 - rho) * t0),

and the smallest pFDR attainable with threshold growth T = d * N satisfies
pfdr_floor = (1 - pi) / ((1 - pi) + pi * exp((1 - rho) T t0)), which equals
alpha exactly at the planned N.

Score-based variants replace the raw observation by a model score; their
rate gains a variance-side term K_f (a density-weighted mean of the score
argument) so N ~ ln(Q) / (theta [(1 - rho) Lambda'(t0) + 2 rho K_f]).

Everything here works through CgfModel, a container of Lambda and its first
two derivatives with an explicit domain; built-in constructors cover normal,
uniform, and centered gamma data plus normal, Cauchy, and Gumbel-type
(log-exponential) score models, and empirical_cgf fits one from a sample.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

from .numerics import (
    RootBracketError,
    RootRangeError,
    digamma,
    find_root_increasing,
)
from .pfdr_core import PfdrTarget, PlanReport

__all__ = [
    "CgfModel",
    "TailIndex",
    "SplitSpec",
    "ScoreModel",
    "SplitOptimum",
    "PsiModel",
    "UnsupportedFamilyError",
    "QuadratureError",
    "normal_family",
    "uniform_family",
    "gamma_family",
    "make_family",
    "normal_score_model",
    "cauchy_score_model",
    "gamma_score_model",
    "make_score_model",
    "legendre",
    "solve_t0",
    "k_f",
    "optimal_split",
    "n_star_general",
    "n_star_score",
    "pfdr_floor_limit",
    "make_psi_model",
    "eta_psi",
    "empirical_cgf",
    "REGIME_CGF_RATE",
    "REGIME_SCORE_RATE",
    "EULER_GAMMA",
]

REGIME_CGF_RATE = "cgf-rate"
REGIME_SCORE_RATE = "score-rate"

EULER_GAMMA = 0.5772156649015328606

# golden-section bracket for the split fraction; optima this close to 0 or 1
# are reported as boundary outcomes rather than interior solutions
_RHO_LO = 1e-4
_RHO_HI = 1.0 - 1e-4
_RHO_BOUNDARY_MARGIN = 1e-3


class UnsupportedFamilyError(ValueError):
    """Requested family has no built-in model of the needed kind."""


class QuadratureError(RuntimeError):
    """Numerical integration failed to converge to the requested accuracy."""


@dataclass(frozen=True)
class TailIndex:
    """Behavior of the paired-difference density g near zero.

    g(v) ~ c |v|^lam as v -> 0 with lam > -1; lam = 0 with finite positive
    g(0) is the common case.  zeta_kind records whether the slowly varying
    part is a constant or carries a logarithmic factor (which changes no
    plan, only its interpretation).
    """

    lam: float = 0.0
    zeta_kind: str = "constant"
    c_const: float | None = None

    def __post_init__(self) -> None:
        if not self.lam > -1.0:
            raise ValueError(f"tail index must be > -1, got {self.lam!r}")
        if self.zeta_kind not in ("constant", "logarithmic"):
            raise ValueError(f"unknown zeta_kind {self.zeta_kind!r}")


@dataclass(frozen=True)
class SplitSpec:
    """Fraction rho of the per-null sample spent on the scale estimate."""

    rho: float

    def __post_init__(self) -> None:
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must be in (0, 1), got {self.rho!r}")


@dataclass(frozen=True)
class CgfModel:
    """Centered log moment generating function with two derivatives.

    lambda_fn(0) = 0 and lambda_d1(0) = 0 (the data are centered); functions
    must be finite on (domain_inf, domain_sup) and are never called outside.
    """

    lambda_fn: Callable[[float], float]
    lambda_d1: Callable[[float], float]
    lambda_d2: Callable[[float], float]
    domain_sup: float = math.inf
    domain_inf: float = -math.inf
    family_tag: str = "custom"


@dataclass(frozen=True)
class ScoreModel:
    """Score transform of the data plus everything the rate formula needs.

    cgf describes the score under the true null; k_f is the variance-side
    rate contribution (0 for scores with even null density); k_f_mode
    records how k_f was obtained.
    """

    cgf: CgfModel
    tail: TailIndex
    k_f: float
    k_f_mode: str = "exact"


@dataclass(frozen=True)
class SplitOptimum:
    """Result of maximizing (1 - rho) t0(rho) over the split fraction.

    rho_star is the interior maximizer, or None when the objective keeps
    improving into a boundary (boundary is then "lower" or "upper" and
    objective is the value at the clipped endpoint).
    """

    rho_star: float | None
    objective: float
    boundary: str | None = None


@dataclass(frozen=True)
class PsiModel:
    """Log mgf of half the squared paired difference: Psi(t) = ln E exp(t (X-Y)^2 / 2).

    Finite for t < domain_sup; sigma2 is the variance of one observation,
    which bounds the slopes Psi' takes on the negative axis from above.
    """

    psi_fn: Callable[[float], float]
    psi_d1: Callable[[float], float]
    sigma2: float
    domain_sup: float = math.inf
    family_tag: str = "custom"


# ---------------------------------------------------------------------------
# built-in data families


def normal_family(sigma: float = 1.0) -> tuple[CgfModel, TailIndex]:
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    s2 = sigma * sigma
    cgf = CgfModel(
        lambda_fn=lambda t: 0.5 * s2 * t * t,
        lambda_d1=lambda t: s2 * t,
        lambda_d2=lambda t: s2,
        family_tag=f"normal(sigma={sigma:g})",
    )
    # X - Y is normal with variance 2 sigma^2: positive finite density at 0
    tail = TailIndex(lam=0.0, c_const=1.0 / (2.0 * sigma * math.sqrt(math.pi)))
    return cgf, tail


def _uniform_lambda(t: float) -> float:
    # ln(2 sinh(u/2) / u) for u = |t|; even in t.  The direct form loses
    # precision to cancellation as u -> 0, so a series takes over there.
    u = abs(t)
    if u < 1e-2:
        u2 = u * u
        return u2 / 24.0 - u2 * u2 / 2880.0 + u2 * u2 * u2 / 181440.0
    return 0.5 * u + math.log(-math.expm1(-u)) - math.log(u)


def _uniform_lambda_d1(t: float) -> float:
    u = abs(t)
    if u < 1e-2:
        v = u / 12.0 - u**3 / 720.0 + u**5 / 30240.0
    else:
        v = 0.5 / math.tanh(0.5 * u) - 1.0 / u
    return math.copysign(v, t) if t != 0.0 else 0.0


def _uniform_lambda_d2(t: float) -> float:
    u = abs(t)
    if u < 0.1:
        u2 = u * u
        return 1.0 / 12.0 - u2 / 240.0 + u2 * u2 / 6048.0
    em1 = -math.expm1(-u)  # 1 - e^(-u) without cancellation
    return 1.0 / (u * u) - math.exp(-u) / (em1 * em1)


def uniform_family(width: float = 1.0) -> tuple[CgfModel, TailIndex]:
    """Uniform on an interval of the given width, centered."""
    if not width > 0.0:
        raise ValueError(f"width must be positive, got {width!r}")
    w = width
    cgf = CgfModel(
        lambda_fn=lambda t: _uniform_lambda(w * t),
        lambda_d1=lambda t: w * _uniform_lambda_d1(w * t),
        lambda_d2=lambda t: w * w * _uniform_lambda_d2(w * t),
        family_tag=f"uniform(width={width:g})",
    )
    # X - Y is triangular on [-w, w]: g(0) = 1/w
    tail = TailIndex(lam=0.0, c_const=1.0 / w)
    return cgf, tail


def gamma_family(shape: float, scale: float = 1.0) -> tuple[CgfModel, TailIndex]:
    """Gamma(shape) data scaled by scale and centered at its mean.

    The paired-difference density at zero is finite only for shape > 1/2;
    at shape = 1/2 it diverges logarithmically and below it like a power,
    so the tail index is lam = 2 * shape - 1 there.
    """
    if not shape > 0.0:
        raise ValueError(f"shape must be positive, got {shape!r}")
    if not scale > 0.0:
        raise ValueError(f"scale must be positive, got {scale!r}")
    a, b = shape, scale
    sup = 1.0 / b

    def lam(t: float) -> float:
        _check_below(t, sup)
        return -a * math.log1p(-b * t) - a * b * t

    def lam1(t: float) -> float:
        _check_below(t, sup)
        return a * b * b * t / (1.0 - b * t)

    def lam2(t: float) -> float:
        _check_below(t, sup)
        return a * b * b / ((1.0 - b * t) * (1.0 - b * t))

    cgf = CgfModel(
        lambda_fn=lam,
        lambda_d1=lam1,
        lambda_d2=lam2,
        domain_sup=sup,
        family_tag=f"gamma(shape={shape:g},scale={scale:g})",
    )
    if a > 0.5:
        tail = TailIndex(lam=0.0)
    elif a == 0.5:
        tail = TailIndex(lam=0.0, zeta_kind="logarithmic")
    else:
        tail = TailIndex(lam=2.0 * a - 1.0)
    return cgf, tail


def _check_below(t: float, sup: float) -> None:
    if t >= sup:
        raise ValueError(f"t = {t!r} is outside the domain (t < {sup!r})")


def make_family(name: str, **params: float) -> tuple[CgfModel, TailIndex]:
    """Built-in data family by name: normal, uniform, or gamma."""
    if name == "normal":
        return normal_family(params.get("sigma", 1.0))
    if name == "uniform":
        return uniform_family(params.get("width", 1.0))
    if name == "gamma":
        if "shape" not in params:
            raise ValueError("gamma family requires a shape parameter")
        return gamma_family(params["shape"], params.get("scale", 1.0))
    raise UnsupportedFamilyError(f"no built-in data family named {name!r}")


# ---------------------------------------------------------------------------
# built-in score models


def normal_score_model(sigma: float = 1.0) -> ScoreModel:
    """Location score of normal data: X = omega / sigma^2, standard deviation 1/sigma."""
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    inv_s2 = 1.0 / (sigma * sigma)
    cgf = CgfModel(
        lambda_fn=lambda t: 0.5 * inv_s2 * t * t,
        lambda_d1=lambda t: inv_s2 * t,
        lambda_d2=lambda t: inv_s2,
        family_tag=f"normal-score(sigma={sigma:g})",
    )
    return ScoreModel(cgf=cgf, tail=TailIndex(lam=0.0), k_f=0.0, k_f_mode="exact")


def _cauchy_ratio(t: float) -> float:
    # I1(t) / I0(t) via exponentially scaled Bessel functions, t >= 0
    return float(special.i1e(t) / special.i0e(t))


def cauchy_score_model() -> ScoreModel:
    """Location score of standard Cauchy data: X = 2 omega / (1 + omega^2).

    The score is bounded in [-1, 1] with an even null density, so K_f = 0;
    its log mgf is ln I0(t), with a logarithmic factor in the tail index
    because the score density blows up like a reciprocal square root at the
    endpoints (which only affects constants, not the plan).
    """

    def lam(t: float) -> float:
        u = abs(t)
        return u + math.log(float(special.i0e(u)))

    def lam1(t: float) -> float:
        u = abs(t)
        if u < 1e-5:
            v = 0.5 * u - u**3 / 16.0
        else:
            v = _cauchy_ratio(u)
        return math.copysign(v, t) if t != 0.0 else 0.0

    def lam2(t: float) -> float:
        u = abs(t)
        if u < 1e-5:
            return 0.5 - 3.0 * u * u / 16.0
        r = _cauchy_ratio(u)
        return 1.0 - r / u - r * r

    cgf = CgfModel(
        lambda_fn=lam, lambda_d1=lam1, lambda_d2=lam2, family_tag="cauchy-score"
    )
    tail = TailIndex(lam=0.0, zeta_kind="logarithmic")
    return ScoreModel(cgf=cgf, tail=tail, k_f=0.0, k_f_mode="exact")


def gamma_score_model() -> ScoreModel:
    """Location score of unit-rate exponential data on the log scale.

    The null score is X = ln(omega) + EULER_GAMMA for omega standard
    exponential, a centered Gumbel-type variable with log mgf
    ln Gamma(1 + t) + EULER_GAMMA t on t > -1.  Its density is asymmetric,
    and K_f = 1 - ln 2 exactly.
    """

    def lam(t: float) -> float:
        if t <= -1.0:
            raise ValueError(f"t = {t!r} is outside the domain (t > -1)")
        return math.lgamma(1.0 + t) + EULER_GAMMA * t

    def lam1(t: float) -> float:
        if t <= -1.0:
            raise ValueError(f"t = {t!r} is outside the domain (t > -1)")
        return digamma(1.0 + t) + EULER_GAMMA

    def lam2(t: float) -> float:
        if t <= -1.0:
            raise ValueError(f"t = {t!r} is outside the domain (t > -1)")
        return float(special.polygamma(1, 1.0 + t))

    cgf = CgfModel(
        lambda_fn=lam,
        lambda_d1=lam1,
        lambda_d2=lam2,
        domain_inf=-1.0,
        family_tag="gamma-score",
    )
    return ScoreModel(
        cgf=cgf,
        tail=TailIndex(lam=0.0),
        k_f=1.0 - math.log(2.0),
        k_f_mode="exact",
    )


def gamma_score_density(x: float) -> float:
    """Null density of the gamma score: f(x) = e^(x+c) exp(-e^(x+c)), c = -EULER_GAMMA."""
    u = x - EULER_GAMMA
    if u > 700.0:
        return 0.0
    return math.exp(u - math.exp(u))


def make_score_model(name: str, **params: float) -> ScoreModel:
    if name in ("normal-score", "normal_score"):
        return normal_score_model(params.get("sigma", 1.0))
    if name in ("cauchy-score", "cauchy_score"):
        return cauchy_score_model()
    if name in ("gamma-score", "gamma_score"):
        return gamma_score_model()
    raise UnsupportedFamilyError(f"no built-in score model named {name!r}")


# ---------------------------------------------------------------------------
# transforms and solvers


def legendre(cgf: CgfModel, u: float) -> tuple[float, float]:
    """Legendre transform of the cgf at slope u.

    Returns (rate, eta) where eta solves Lambda'(eta) = u and
    rate = u * eta - Lambda(eta).  At u = 0 both are zero for a centered
    cgf.  Slopes outside the closure of Lambda's derivative range raise
    RootRangeError.
    """
    if u == 0.0:
        return 0.0, 0.0
    d2_0 = cgf.lambda_d2(0.0)
    hint = u / d2_0 if d2_0 > 0.0 else u
    if u > 0.0:
        lo, hi = 0.0, cgf.domain_sup
        if math.isfinite(hi) and hint >= hi:
            hint = 0.5 * hi
        hint = max(hint, math.nextafter(0.0, 1.0))
    else:
        lo, hi = cgf.domain_inf, 0.0
        if math.isfinite(lo) and hint <= lo:
            hint = 0.5 * lo
        hint = min(hint, math.nextafter(0.0, -1.0))
    try:
        eta = find_root_increasing(cgf.lambda_d1, u, hint, lo=lo, hi=hi)
    except RootBracketError as exc:
        raise RootRangeError(
            f"slope u = {u!r} is outside the derivative range of the cgf "
            f"({cgf.family_tag})"
        ) from exc
    return u * eta - cgf.lambda_fn(eta), eta


def solve_t0(cgf: CgfModel, tail: TailIndex, split: SplitSpec) -> float:
    """Unique positive root of t Lambda'(t) = (1 + lam) rho / (1 - rho).

    The left side is zero at t = 0 and strictly increasing on the positive
    domain, so the root exists whenever the function's supremum exceeds the
    right side; a finite cgf domain whose boundary is approached without a
    crossing raises RootBracketError.
    """
    rhs = (1.0 + tail.lam) * split.rho / (1.0 - split.rho)
    d2_0 = cgf.lambda_d2(0.0)
    if not d2_0 > 0.0:
        raise RootRangeError(
            "cgf has no curvature at the origin; the data carry no signal"
        )
    hint = math.sqrt(rhs / d2_0)
    sup = cgf.domain_sup
    if math.isfinite(sup) and hint >= sup:
        hint = 0.5 * sup
    return find_root_increasing(
        lambda t: t * cgf.lambda_d1(t), rhs, hint, lo=0.0, hi=sup
    )


def k_f(
    density: Callable[[float], float],
    mode: str = "density-weighted",
    support: tuple[float, float] = (-math.inf, math.inf),
) -> float:
    """Variance-side rate contribution of a score with null density f.

    K_f = (integral of z f(z)^2 dz) / (integral of f(z)^2 dz); zero for any
    even density, which the "symmetric" mode asserts without integrating.
    """
    if mode == "symmetric":
        return 0.0
    if mode != "density-weighted":
        raise ValueError(f"unknown k_f mode {mode!r}")
    lo, hi = support
    num = _quad_split(lambda z: z * density(z) ** 2, lo, hi)
    den = _quad_split(lambda z: density(z) ** 2, lo, hi)
    if not math.isfinite(num) or not math.isfinite(den) or den <= 0.0:
        raise QuadratureError(
            f"density-weighted integrals did not converge (num={num!r}, den={den!r})"
        )
    return num / den


def _quad_split(fn: Callable[[float], float], lo: float, hi: float) -> float:
    # split at zero so the two infinite half-lines are handled separately
    pieces = [(lo, 0.0), (0.0, hi)] if lo < 0.0 < hi else [(lo, hi)]
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for a, b in pieces:
            try:
                val, err = integrate.quad(
                    fn, a, b, epsabs=1e-10, epsrel=1e-10, limit=200
                )
            except Exception as exc:
                raise QuadratureError(
                    f"integration failed on ({a}, {b}): {exc}"
                ) from exc
            if err > 1e-8 * max(1.0, abs(val)):
                raise QuadratureError(
                    f"integration error estimate {err:.3g} too large on ({a}, {b})"
                )
            total += val
    return total


def optimal_split(cgf: CgfModel, tail: TailIndex) -> SplitOptimum:
    """Split fraction maximizing the sample size rate (1 - rho) t0(rho).

    Golden-section search on a clipped interval; a maximizer that runs into
    either end is reported as a boundary outcome rather than an interior
    rho_star.
    """

    def objective(rho: float) -> float:
        return (1.0 - rho) * solve_t0(cgf, tail, SplitSpec(rho))

    invphi = 0.5 * (math.sqrt(5.0) - 1.0)
    a, b = _RHO_LO, _RHO_HI
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = objective(c), objective(d)
    while b - a > 1e-9:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = objective(d)
    x = 0.5 * (a + b)
    val = objective(x)
    # an endpoint that matches the interior maximum means the objective is
    # monotone (or plateaus) into that boundary: the supremum is not interior
    tol = 1e-9 * max(1.0, abs(val))
    upper = objective(_RHO_HI)
    if upper >= val - tol or _RHO_HI - x < _RHO_BOUNDARY_MARGIN:
        return SplitOptimum(rho_star=None, objective=max(val, upper), boundary="upper")
    lower = objective(_RHO_LO)
    if lower >= val - tol or x - _RHO_LO < _RHO_BOUNDARY_MARGIN:
        return SplitOptimum(rho_star=None, objective=max(val, lower), boundary="lower")
    return SplitOptimum(rho_star=x, objective=val, boundary=None)


# ---------------------------------------------------------------------------
# planners


def pfdr_floor_limit(pi: float, rho: float, t_growth: float, t0: float) -> float:
    """Limiting lower bound on pFDR when the threshold grows like T = d N.

    (1 - pi) / ((1 - pi) + pi exp((1 - rho) T t0)); decreasing in T.
    """
    if not 0.0 < pi < 1.0:
        raise ValueError(f"pi must be in (0, 1), got {pi!r}")
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must be in (0, 1), got {rho!r}")
    gain = math.exp(min((1.0 - rho) * t_growth * t0, 700.0))
    return (1.0 - pi) / ((1.0 - pi) + pi * gain)


def n_star_general(
    target: PfdrTarget,
    cgf: CgfModel,
    tail: TailIndex,
    split: SplitSpec,
    d: float,
) -> PlanReport:
    """Total per-null sample size N for mean shift d under a data cgf.

    N_asymptotic = ln(Q) / (d (1 - rho) t0); the integer plan in the
    diagnostics rounds N up and splits it as m = round(rho N) scale
    observations (used in pairs) and n = N - m mean observations.
    """
    if not d > 0.0:
        raise ValueError(f"mean shift d must be positive, got {d!r}")
    q = target.q()
    t0 = solve_t0(cgf, tail, split)
    rho = split.rho
    log_q = math.log(q)
    n_asym = log_q / (d * (1.0 - rho) * t0) if log_q > 0.0 else 1.0
    n_ceil = max(1.0, math.ceil(n_asym))
    m_split = round(rho * n_ceil)
    diagnostics = {
        "t0": t0,
        "lambda_tail": tail.lam,
        "rho": rho,
        "log_q": log_q,
        "n_ceiling": n_ceil,
        "m_variance_part": float(m_split),
        "n_mean_part": float(n_ceil - m_split),
        "pfdr_floor_at_plan": pfdr_floor_limit(target.pi, rho, d * n_ceil, t0),
    }
    return PlanReport(
        n_exact=None,
        n_asymptotic=n_asym,
        regime=REGIME_CGF_RATE,
        q_value=q,
        diagnostics=diagnostics,
    )


def n_star_score(
    target: PfdrTarget,
    model: ScoreModel,
    split: SplitSpec,
    theta: float,
) -> PlanReport:
    """Total per-null sample size N for location shift theta under a score model.

    The score shifts the rate two ways: through the mean side (1 - rho)
    Lambda'(t0) and through the scale side 2 rho K_f, so
    N_asymptotic = ln(Q) / (theta [(1 - rho) Lambda'(t0) + 2 rho K_f]).
    """
    if not theta > 0.0:
        raise ValueError(f"location shift theta must be positive, got {theta!r}")
    q = target.q()
    t0 = solve_t0(model.cgf, model.tail, split)
    rho = split.rho
    lam1_t0 = model.cgf.lambda_d1(t0)
    rate = theta * ((1.0 - rho) * lam1_t0 + 2.0 * rho * model.k_f)
    if not rate > 0.0:
        raise ValueError(
            f"score rate is not positive (rate={rate!r}); the split or the "
            "model's K_f leaves no usable signal"
        )
    log_q = math.log(q)
    n_asym = log_q / rate if log_q > 0.0 else 1.0
    n_ceil = max(1.0, math.ceil(n_asym))
    m_split = round(rho * n_ceil)
    diagnostics = {
        "t0": t0,
        "lambda_prime_t0": lam1_t0,
        "k_f": model.k_f,
        "lambda_tail": model.tail.lam,
        "rho": rho,
        "log_q": log_q,
        "n_ceiling": n_ceil,
        "m_variance_part": float(m_split),
        "n_mean_part": float(n_ceil - m_split),
    }
    return PlanReport(
        n_exact=None,
        n_asymptotic=n_asym,
        regime=REGIME_SCORE_RATE,
        q_value=q,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# squared-difference transform (the scale side of the rejection rule)


def make_psi_model(name: str, **params: float) -> PsiModel:
    """Psi model (log mgf of (X - Y)^2 / 2) for a built-in family."""
    if name == "normal":
        sigma = params.get("sigma", 1.0)
        if not sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {sigma!r}")
        s2 = sigma * sigma
        sup = 0.5 / s2

        def psi(t: float) -> float:
            _check_below(t, sup)
            return -0.5 * math.log1p(-2.0 * s2 * t)

        def psi1(t: float) -> float:
            _check_below(t, sup)
            return s2 / (1.0 - 2.0 * s2 * t)

        return PsiModel(
            psi_fn=psi,
            psi_d1=psi1,
            sigma2=s2,
            domain_sup=sup,
            family_tag=f"normal(sigma={sigma:g})",
        )
    if name == "uniform":
        width = params.get("width", 1.0)
        if not width > 0.0:
            raise ValueError(f"width must be positive, got {width!r}")
        w = width

        # X - Y is triangular on [-w, w]; by symmetry integrate v in (0, w)
        # with density (2/w)(1 - v/w)
        def _mgf_moment(t: float, power: int) -> float:
            val, err = integrate.quad(
                lambda v: (v * v / 2.0) ** power
                * math.exp(t * v * v / 2.0)
                * (1.0 - v / w),
                0.0,
                w,
                epsabs=1e-12,
                epsrel=1e-12,
                limit=200,
            )
            if err > 1e-9 * max(1.0, abs(val)):
                raise QuadratureError(
                    f"squared-difference transform did not converge at t={t!r}"
                )
            return val * 2.0 / w

        def psi(t: float) -> float:
            return math.log(_mgf_moment(t, 0))

        def psi1(t: float) -> float:
            return _mgf_moment(t, 1) / _mgf_moment(t, 0)

        return PsiModel(
            psi_fn=psi,
            psi_d1=psi1,
            sigma2=w * w / 12.0,
            domain_sup=math.inf,
            family_tag=f"uniform(width={width:g})",
        )
    raise UnsupportedFamilyError(
        f"no built-in squared-difference transform for family {name!r}"
    )


def eta_psi(model: PsiModel, u: float) -> float:
    """Tilt eta solving Psi'(eta) = u for a slope 0 < u < sigma2.

    The root is negative (Psi'(0) = E (X - Y)^2 / 2 = sigma2 exceeds u) and
    u * eta -> -(lam + 1)/2 as u -> 0 for tail index lam, so the hint scales
    like -1/(2u).
    """
    if not 0.0 < u < model.sigma2:
        raise ValueError(
            f"slope must be in (0, sigma2) = (0, {model.sigma2!r}), got {u!r}"
        )
    return find_root_increasing(
        model.psi_d1, u, bracket_hint=-0.5 / u, lo=-math.inf, hi=0.0
    )


# ---------------------------------------------------------------------------
# empirical cgf


def empirical_cgf(
    sample: Sequence[float] | np.ndarray,
    t_grid: Sequence[float] | np.ndarray,
    overflow_budget: float = 700.0,
) -> CgfModel:
    """Centered empirical cgf of a sample, valid on a safe hull of t_grid.

    The sample is centered at its mean; the admissible t interval is the
    hull of t_grid intersected with { t : max_i |t x_i| <= overflow_budget }
    so every later evaluation stays finite.  Derivatives are the exact
    tilted moments of the empirical distribution.
    """
    x = np.asarray(sample, dtype=float).ravel()
    if x.size < 100:
        raise ValueError(f"need at least 100 observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("sample contains non-finite values")
    x = x - x.mean()
    grid = np.asarray(t_grid, dtype=float).ravel()
    if grid.size < 2:
        raise ValueError("t_grid needs at least two points")
    t_lo, t_hi = float(grid.min()), float(grid.max())
    x_min, x_max = float(x.min()), float(x.max())
    allow_hi = overflow_budget / x_max if x_max > 0.0 else math.inf
    allow_lo = overflow_budget / x_min if x_min < 0.0 else -math.inf
    sup = min(t_hi, allow_hi)
    inf_ = max(t_lo, allow_lo)
    if not inf_ < 0.0 < sup:
        raise ValueError(
            f"admissible t interval ({inf_:.3g}, {sup:.3g}) does not contain 0; "
            "widen t_grid or rescale the sample"
        )

    def _tilted(t: float) -> tuple[float, float, float]:
        if not inf_ <= t <= sup:
            raise ValueError(f"t = {t!r} outside the admissible interval")
        w = t * x
        m = float(w.max())
        e = np.exp(w - m)
        s = float(e.sum())
        mean1 = float((x * e).sum()) / s
        mean2 = float((x * x * e).sum()) / s
        lam = m + math.log(s / x.size)
        return lam, mean1, mean2 - mean1 * mean1

    return CgfModel(
        lambda_fn=lambda t: _tilted(t)[0],
        lambda_d1=lambda t: _tilted(t)[1],
        lambda_d2=lambda t: _tilted(t)[2],
        domain_sup=sup,
        domain_inf=inf_,
        family_tag="empirical",
    )
