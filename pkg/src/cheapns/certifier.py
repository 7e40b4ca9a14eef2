"""Log-domain replay of the frequency-cascade blow-up argument.

Stage times satisfy t_k = ln2 · (1 - 4^{-k}) / 3 and accumulate at
t_∞ = ln2 / 3.  For k beyond ~27 consecutive stage times are equal in double
precision, so times are carried as exact rationals in units of ln 2
(:class:`CascadeTime`).  Amplitudes are handled as log₂ exponents; the
quantities involved are of size A^{2^k}, far outside double range.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .profiles import make_w_annulus, make_wk
from .spectral import LN2, NEG_INF, FrequencyGrid, SpectralField, convolve, scale

# blow-up threshold on log₂ A: 2^4 · e^{t_∞} = 2^{4 + 1/3}
THRESHOLD_LOG2 = Fraction(13, 3)


class CascadeTime(float):
    """A time ``ratio * ln 2`` whose ``ratio`` is kept as an exact Fraction."""

    def __new__(cls, ratio):
        ratio = Fraction(ratio)
        obj = super().__new__(cls, float(ratio) * LN2)
        obj.ratio = ratio
        return obj

    def __repr__(self):
        return f"CascadeTime({self.ratio}·ln2 ≈ {float(self)!r})"


def time_ratio(t) -> Fraction:
    """t / ln 2 as a Fraction (exact for CascadeTime, float-exact otherwise)."""
    ratio = getattr(t, "ratio", None)
    if ratio is not None:
        return ratio
    return Fraction(float(t)) / Fraction(LN2)


def t_k(k) -> CascadeTime:
    """Stage time t_k; ``k = math.inf`` gives the accumulation time t_∞."""
    if k == math.inf:
        return CascadeTime(Fraction(1, 3))
    if k < 0 or int(k) != k:
        raise ValueError(f"stage index must be a nonnegative integer, got {k}")
    return CascadeTime((1 - Fraction(1, 4 ** int(k))) / 3)


T_INF = t_k(math.inf)


def reached(t, k) -> bool:
    """t >= t_k: exact for CascadeTime, at float precision for plain floats."""
    if getattr(t, "ratio", None) is not None:
        return t.ratio >= t_k(k).ratio
    return float(t) >= float(t_k(k))


def t_k_recurrence(k: int) -> float:
    """t_k accumulated as t_{j-1} + 2^{-2j} ln2 in floating point."""
    t = 0.0
    for j in range(1, k + 1):
        t += LN2 * 4.0 ** -j
    return t


def alpha_log2(k: int, t) -> float:
    """log₂ α_k(t) with α_k(t) = 2^{k-4(2^k-1)} e^{-2^k t} 1{t >= t_k}."""
    if not reached(t, k):
        return NEG_INF
    return float(k - 4 * (2 ** k - 1) - 2 ** k * time_ratio(t))


def exponent_bookkeeping_holds(k: int) -> bool:
    """2^{k-1} (2^{(k-1)-4(2^{k-1}-1)})² = 2^{k-4(2^k-1)} · 2^{1+2k} on exponents."""
    lhs = (k - 1) + 2 * ((k - 1) - 4 * (2 ** (k - 1) - 1))
    rhs = (k - 4 * (2 ** k - 1)) + (1 + 2 * k)
    return lhs == rhs


def verify_inductive_step(k: int, t) -> float:
    """Margin in bits of the inductive step from stage k-1 to stage k at time t.

    The step needs 2(1 - e^{2^{2k}(t_{k-1} - t)}) >= 1; the margin is log₂ of
    the left side and is exactly zero at t = t_k.
    """
    if k < 1:
        raise ValueError(f"inductive step needs k >= 1, got {k}")
    if not reached(t, k):
        raise ValueError(f"t={float(t)!r} precedes t_{k}={float(t_k(k))!r}")
    # a float that reaches t_k counts as at least t_k, even where rounding disagrees
    r = max(time_ratio(t), t_k(k).ratio)
    if not exponent_bookkeeping_holds(k):
        raise ArithmeticError(f"exponent bookkeeping fails at k={k}")
    # 2^{2k}(t - t_{k-1}) in units of ln 2, exact
    x = 4 ** k * (r - t_k(k - 1).ratio)
    return 1.0 + math.log2(-math.expm1(-float(x) * LN2))


def _as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def besov_lower_bound_log2(A_log2, a, k: int, t, exact: bool = False):
    """log₂ of A^{2^k} 2^{ak + k - 4(2^k-1)} e^{-2^k t}.

    Grouped as 2^k (log₂A - 4 - t/ln2) + (a+1)k + 4 and evaluated in exact
    rationals, so the 2^k terms cancel exactly at the threshold.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    A = _as_fraction(A_log2)
    val = 2 ** k * (A - 4 - time_ratio(t)) + (_as_fraction(a) + 1) * k + 4
    return val if exact else float(val)


class Verdict(str, Enum):
    DIVERGES = "diverges"
    BELOW_THRESHOLD = "below_threshold"


def asymptotic_slope(A_log2, t=T_INF) -> Fraction:
    """Coefficient of 2^k in the Besov lower bound."""
    return _as_fraction(A_log2) - 4 - time_ratio(t)


def threshold_from_slope(t=T_INF) -> Fraction:
    """The log₂ A at which the asymptotic slope vanishes."""
    return 4 + time_ratio(t)


def classify(A_log2, a=0) -> Verdict:
    """``diverges`` iff the 2^k coefficient of the bound at t_∞ is positive.

    The linear term (a+1)k cannot compete with 2^k, so the verdict does not
    depend on ``a``.  At exactly zero slope the bound is only linear in k and
    the verdict is ``below_threshold``.
    """
    slope = asymptotic_slope(A_log2)
    if threshold_from_slope() != THRESHOLD_LOG2:
        raise ArithmeticError("slope-derived threshold disagrees with 13/3")
    by_slope = slope > 0
    if by_slope != (_as_fraction(A_log2) > THRESHOLD_LOG2):
        raise ArithmeticError("slope test and literal threshold disagree")
    return Verdict.DIVERGES if by_slope else Verdict.BELOW_THRESHOLD


@dataclass
class Stage:
    k: int
    t_k: float
    alpha_log2: float
    step_margin_bits: float | None
    besov_lb_log2: float


@dataclass
class CascadeCertificate:
    A_log2: float
    a: float
    t: float
    stages: list[Stage] = field(default_factory=list)
    verdict: Verdict = Verdict.BELOW_THRESHOLD

    def failed_stage(self) -> int | None:
        for s in self.stages:
            if s.step_margin_bits is not None and s.step_margin_bits < 0:
                return s.k
        return None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict.value
        return d


class CertificateError(RuntimeError):
    def __init__(self, stage, margin):
        super().__init__(f"inductive step fails at stage {stage} (margin {margin} bits)")
        self.stage = stage


def build_certificate(A_log2, a=0, k_max: int = 60, t=T_INF, strict: bool = True) -> CascadeCertificate:
    """Run every scalar check of the induction for stages 0..k_max at time t.

    Stage 0 is the heat bound û_t >= e^{-t|ξ|²}û₀ >= e^{-t} A ŵ₀, using
    |ξ| <= 1 on the support of ŵ₀.  Stages with t < t_k carry a zero bound
    (log₂ = -inf) and no step margin.
    """
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    cert = CascadeCertificate(float(_as_fraction(A_log2)), float(a), float(t))
    for k in range(k_max + 1):
        tk = t_k(k)
        active = reached(t, k)
        margin = verify_inductive_step(k, t) if (k >= 1 and active) else None
        lb = besov_lower_bound_log2(A_log2, a, k, t) if active else NEG_INF
        cert.stages.append(Stage(k, float(tk), alpha_log2(k, t), margin, lb))
        if strict and margin is not None and margin < 0:
            raise CertificateError(k, margin)
    cert.verdict = classify(A_log2, a)
    return cert


def check_field_dominates(f: SpectralField, k: int, A_log2: float, t) -> float:
    """min over supp ŵ_k of log₂ f - log₂(A^{2^k} α_k(t) ŵ_k), in bits."""
    grid = f.grid
    if grid.xi_max < 2.0 ** k:
        raise ValueError(f"xi_max={grid.xi_max} truncates the support of w_{k}")
    alpha = alpha_log2(k, t)
    if alpha == NEG_INF:
        raise ValueError(f"t={float(t)!r} precedes t_{k}; the bound is vacuous")
    wk = make_wk(k, grid, method="direct")
    supp = wk.coeffs > 0
    with np.errstate(divide="ignore"):
        lhs = np.log2(f.coeffs[supp]) + f.exp2
        rhs = 2.0 ** k * float(A_log2) + alpha + np.log2(wk.coeffs[supp]) + wk.exp2
    return float(np.min(lhs - rhs))


# non-existence series

def noexist_terms(K: int, t: float) -> np.ndarray:
    """Terms k = 1..K of Σ 2^{2k-1}/(2^{2k+1}-4) e^{-4t}(1 - e^{(4-2^{2k+1})t})."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if not t > 0:
        raise ValueError(f"the series degenerates at t <= 0 (t={t})")
    k = np.arange(1, K + 1, dtype=float)
    # 2^{2k-1}/(2^{2k+1}-4) rewritten to stay finite for large k
    coef = 1.0 / (4.0 * (1.0 - np.exp2(1.0 - 2.0 * k)))
    with np.errstate(over="ignore"):
        decay = -np.expm1((4.0 - np.exp2(2.0 * k + 1.0)) * t)
    return coef * math.exp(-4.0 * t) * decay


def noexist_partial_sum(K: int, t: float) -> float:
    return math.fsum(noexist_terms(K, t))


def noexist_partial_sums(Ks, t: float) -> list[float]:
    terms = noexist_terms(max(Ks), t)
    return [math.fsum(terms[:K]) for K in Ks]


def first_iterate_lower_bound(grid: FrequencyGrid, K: int, t: float,
                              frequency_weight: bool = True) -> SpectralField:
    """S_K(t)·(ŵ∗ŵ) bounding the nonlinear part of the first Picard iterate.

    The bound on ∫ e^{(s-t)|ξ|²}|ξ|(û_s∗û_s) ds needs the factor |ξ|; it is
    kept as min(1, |ξ|) unless ``frequency_weight`` is False, in which case
    the bound is valid only where |ξ| >= 1.
    """
    S = noexist_partial_sum(K, t)
    if grid.xi_max < 2:
        raise ValueError("xi_max must be at least 2 to hold the support of ŵ∗ŵ")
    w = make_w_annulus(grid)
    ww = convolve(w, w, "direct")
    if frequency_weight:
        ww = ww.replace(ww.coeffs * np.minimum(1.0, grid.radius))
    out = scale(ww, S)
    return out.replace(out.coeffs, meta={"S_K": S, "K": K, "t": float(t),
                                          "frequency_weight": frequency_weight})
