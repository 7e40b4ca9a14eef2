"""Explicit Fourier profiles used by the blow-up and non-existence constructions.

``make_w`` is a sum of two poly2 bumps on the balls of radius 1/4 around
±(3/4)e₁, normalized to L¹ mass 2.  ``make_w_annulus`` is the profile
supported in the annulus 1/2 <= |ξ| <= 1; its mass is also normalized to 2,
although divergence of the non-existence series does not depend on it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .spectral import (
    FrequencyGrid,
    SpectralField,
    convolve,
    flip,
    renormalize,
)

W_CENTER = 0.75
W_RADIUS = 0.25
W_MASS = 2.0
ANNULUS = (0.5, 1.0)


@dataclass(frozen=True)
class BumpSpec:
    center: tuple[float, ...]
    radius: float
    shape: str = "poly2"
    mass: float = 1.0

    def __post_init__(self):
        if self.shape != "poly2":
            raise ValueError(f"unsupported bump shape {self.shape!r}")
        if self.radius <= 0:
            raise ValueError("bump radius must be positive")


def _poly2(s: np.ndarray) -> np.ndarray:
    return np.where(s < 1.0, (1.0 - s * s) ** 2, 0.0)


def bump(grid: FrequencyGrid, spec: BumpSpec) -> np.ndarray:
    """Samples of the bump, scaled to ``spec.mass`` on this grid."""
    center = tuple(spec.center) + (0.0,) * (grid.dim - len(spec.center))
    d2 = sum((c - x0) ** 2 for c, x0 in zip(grid.coords, center))
    vals = _poly2(np.sqrt(d2) / spec.radius)
    total = math.fsum(vals.ravel()) * grid.cell
    if total == 0:
        raise ValueError(f"grid dxi={grid.dxi} does not resolve the bump {spec}")
    return vals * (spec.mass / total)


def _require_resolution(grid: FrequencyGrid, dxi_max: float = 1 / 16):
    if grid.dxi > dxi_max:
        raise ValueError(f"dxi={grid.dxi} too coarse to resolve the profile (need <= {dxi_max})")


def make_w(grid: FrequencyGrid) -> SpectralField:
    """Even profile of mass 2 supported on the balls B_{1/4}(±3e₁/4)."""
    _require_resolution(grid)
    if grid.xi_max < 1:
        raise ValueError("xi_max must be at least 1 to hold the profile")
    pos = bump(grid, BumpSpec((W_CENTER,), W_RADIUS, mass=W_MASS / 2))
    return renormalize(SpectralField(grid, pos + flip(pos), 0, True, {"profile": "w"}))


def positive_ball_mask(grid: FrequencyGrid) -> np.ndarray:
    d2 = (grid.coords[0] - W_CENTER) ** 2 + sum(c * c for c in grid.coords[1:])
    return d2 <= W_RADIUS ** 2


def make_w0(w: SpectralField) -> SpectralField:
    """Restriction of ŵ to the ball around +3e₁/4 (mass 1)."""
    c = np.where(positive_ball_mask(w.grid), w.coeffs, 0.0)
    return renormalize(w.replace(c, even=False, meta={"profile": "w0"}))


def make_wk(k: int, grid: FrequencyGrid, method: str = "auto") -> SpectralField:
    """ŵ_k = ŵ_{k-1} ∗ ŵ_{k-1}, supported in 2^{k-1} <= |ξ| <= 2^k."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if grid.xi_max < 2.0 ** k:
        raise ValueError(f"xi_max={grid.xi_max} < 2^{k}: the support of w_{k} would be truncated")
    return _wk_cached(k, grid, method)


@lru_cache(maxsize=64)
def _wk_cached(k, grid, method):
    if k == 0:
        return make_w0(make_w(grid))
    prev = _wk_cached(k - 1, grid, method)
    out = convolve(prev, prev, method)
    return out.replace(out.coeffs, meta={"profile": f"wk:{k}"})


# Littlewood-Paley partition of unity

def _smooth_step(x: np.ndarray) -> np.ndarray:
    """C∞ step: 0 for x <= 0, 1 for x >= 1."""
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / x), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / (1.0 - x)), 0.0)
    return a / (a + b)


def lp_symbol(k: int, r) -> np.ndarray:
    """Φ(2^{-k} r): smooth, supported in 2^{k-1} <= r <= 2^{k+1}.

    On the log scale s = log₂ r - k the symbol rises as h(s+1) on [-1, 0]
    and falls as 1 - h(s) on [0, 1], so neighbouring k sum to exactly one.
    """
    r = np.asarray(r, dtype=float)
    out = np.zeros(r.shape)
    pos = r > 0
    s = np.log2(r[pos]) - k
    rise = _smooth_step(s + 1.0)
    fall = 1.0 - _smooth_step(s)
    out[pos] = np.where(np.abs(s) >= 1.0, 0.0, np.where(s <= 0, rise, fall))
    return out


def lp_range(grid: FrequencyGrid) -> range:
    """Dyadic indices whose filter support [2^{k-1}, 2^{k+1}] the grid resolves."""
    k_min = math.ceil(math.log2(grid.dxi)) + 1
    k_max = math.floor(math.log2(grid.xi_max)) - 1
    return range(k_min, k_max + 1)


@lru_cache(maxsize=256)
def lp_filter_array(grid: FrequencyGrid, k: int) -> np.ndarray:
    a = lp_symbol(k, grid.radius)
    a.flags.writeable = False
    return a


def make_lp_filter(k: int, grid: FrequencyGrid) -> SpectralField:
    if k not in lp_range(grid):
        r = lp_range(grid)
        raise ValueError(f"filter index {k} outside resolvable range [{r.start}, {r.stop - 1}]")
    return SpectralField(grid, lp_filter_array(grid, k), 0, True, {"profile": f"lp:{k}"})


# non-existence datum

def make_w_annulus(grid: FrequencyGrid) -> SpectralField:
    """Even poly2 profile on the annulus 1/2 <= |ξ| <= 1 with mass 2."""
    _require_resolution(grid)
    lo, hi = ANNULUS
    mid, half = (lo + hi) / 2, (hi - lo) / 2
    vals = _poly2(np.abs(grid.radius - mid) / half)
    vals = vals * (W_MASS / (math.fsum(vals.ravel()) * grid.cell))
    vals = 0.5 * (vals + flip(vals))
    return renormalize(SpectralField(grid, vals, 0, True, {"profile": "w_annulus", "mass": W_MASS}))


def _shift_e1(a: np.ndarray, bins: int) -> np.ndarray:
    """Translate along axis 0 by ``bins`` (ξ -> ξ + bins·dxi), zero filled."""
    out = np.zeros_like(a)
    if bins >= 0:
        out[bins:] = a[:a.shape[0] - bins]
    else:
        out[:bins] = a[-bins:]
    return out


def make_v(K: int, grid: FrequencyGrid) -> SpectralField:
    """Fourier side of Σ_{k<=K} 2^k cos((2^k-1)ξ₁) w(x) for the annulus w."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if grid.xi_max < 2.0 ** K:
        raise ValueError(f"xi_max={grid.xi_max} < 2^{K}: outer copies would be truncated")
    w = make_w_annulus(grid)
    base = np.ldexp(w.coeffs, w.exp2)
    total = np.zeros(grid.shape)
    for k in range(1, K + 1):
        shift = (2 ** k - 1) / grid.dxi
        if shift != int(shift):
            raise ValueError(f"shift {2 ** k - 1} is not a multiple of dxi={grid.dxi}")
        pair = _shift_e1(base, int(shift))
        total += 2.0 ** (k - 1) * (pair + flip(pair))
    return renormalize(SpectralField(grid, total, 0, True,
                                     {"profile": f"v:{K}", "w_mass": W_MASS}))


def profile_by_name(name: str, grid: FrequencyGrid) -> SpectralField:
    """Resolve ``w``, ``w0``, ``wk:<k>``, ``lp:<k>``, ``v:<K>`` or ``w_annulus``."""
    head, _, arg = name.partition(":")
    if head == "w" and not arg:
        return make_w(grid)
    if head == "w0" and not arg:
        return make_w0(make_w(grid))
    if head == "w_annulus" and not arg:
        return make_w_annulus(grid)
    try:
        idx = int(arg)
    except ValueError:
        raise ValueError(f"unknown profile {name!r}") from None
    if head == "wk":
        return make_wk(idx, grid)
    if head == "lp":
        return make_lp_filter(idx, grid)
    if head == "v":
        return make_v(idx, grid)
    raise ValueError(f"unknown profile {name!r}")
