"""Littlewood-Paley blocks and the homogeneous Besov norm Ḃ^{a,∞}_∞.

For a field with φ̂_k·û >= 0 the sup norm of φ_k∗u equals the L¹ mass of
φ̂_k·û (see the normalization note in :mod:`cheapns.spectral`).  Fields in
this package are always nonnegative, so no signed path exists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .profiles import lp_filter_array, lp_range
from .spectral import NEG_INF, FrequencyGrid, SpectralField


@dataclass(frozen=True)
class BesovProfile:
    a: float
    block_log2: dict[int, float]
    norm_log2: float


def _masked_log2_mass(f: SpectralField, weights: np.ndarray) -> float:
    s = math.fsum((f.coeffs * weights).ravel())
    if s == 0:
        return NEG_INF
    return math.log2(s) + f.exp2 + f.grid.dim * math.log2(f.grid.dxi)


def block_masses(f: SpectralField) -> dict[int, float]:
    """log₂ ‖φ̂_k f‖_{L¹} for every resolvable k (no 2^{ak} weight)."""
    return {k: _masked_log2_mass(f, lp_filter_array(f.grid, k)) for k in lp_range(f.grid)}


def besov_norm(f: SpectralField, a: float, blocks: dict[int, float] | None = None) -> BesovProfile:
    if blocks is None:
        blocks = block_masses(f)
    weighted = {k: (v + a * k if v != NEG_INF else NEG_INF) for k, v in blocks.items()}
    norm = max(weighted.values(), default=NEG_INF)
    return BesovProfile(float(a), weighted, norm)


def shell_index(grid: FrequencyGrid) -> np.ndarray:
    """Shell k holds 2^{k-1} < |ξ| <= 2^k; the origin joins the lowest shell."""
    return _shell_index(grid)


@lru_cache(maxsize=32)
def _shell_index(grid):
    r = grid.radius
    k_lo = math.ceil(math.log2(grid.dxi))
    mant, ex = np.frexp(r)
    # ceil(log2 r) without rounding: r = mant * 2^ex with mant in [1/2, 1)
    k = np.where(mant == 0.5, ex - 1, ex)
    k = np.where(r > 0, np.maximum(k, k_lo), k_lo)
    k.flags.writeable = False
    return k


def shell_masses(f: SpectralField) -> dict[int, float]:
    idx = shell_index(f.grid)
    scale = f.exp2 + f.grid.dim * math.log2(f.grid.dxi)
    out = {}
    for k in range(int(idx.min()), int(idx.max()) + 1):
        s = math.fsum(f.coeffs[idx == k])
        out[k] = math.log2(s) + scale if s > 0 else NEG_INF
    return out
