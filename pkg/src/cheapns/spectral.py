"""Frequency-space data model.

The state of every computation is a sampled Fourier transform on a uniform
symmetric grid.  Physical space never appears.

Normalization convention: a field's coefficients are samples of û(ξ) and all
integrals over ξ are Riemann sums ``Σ coeffs · dxi**dim``.  The transform is
taken without 2π factors, so for a nonnegative product φ̂·û the sup norm of
φ∗u is exactly the L¹ mass of φ̂·û.  Every norm in the package relies on
this one identity.

Fields carry a power-of-two exponent so that values of size A**(2**k) stay
representable: the value at ξ is ``coeffs[ξ] * 2**exp2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import fft as sfft

from . import kernels

LN2 = math.log(2.0)
NEG_INF = -math.inf


class InvariantError(ValueError):
    """A field violates nonnegativity, finiteness or evenness."""


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class FrequencyGrid:
    """Points ``i*dxi`` for ``|i| <= xi_max/dxi`` along each of ``dim`` axes."""

    dim: int
    dxi: float
    xi_max: float

    @cached_property
    def half(self) -> int:
        return int(round(self.xi_max / self.dxi))

    @property
    def n(self) -> int:
        return 2 * self.half + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def cell(self) -> float:
        return self.dxi ** self.dim

    @cached_property
    def axis(self) -> np.ndarray:
        a = np.arange(-self.half, self.half + 1) * self.dxi
        a.flags.writeable = False
        return a

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        if self.dim == 1:
            return (self.axis,)
        return tuple(np.meshgrid(self.axis, self.axis, indexing="ij"))

    @cached_property
    def radius_sq(self) -> np.ndarray:
        r2 = sum(c * c for c in self.coords)
        r2.flags.writeable = False
        return r2

    @cached_property
    def radius(self) -> np.ndarray:
        r = np.sqrt(self.radius_sq)
        r.flags.writeable = False
        return r

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)


def make_grid(dim: int, dxi: float, xi_max: float) -> FrequencyGrid:
    if dim not in (1, 2):
        raise ValueError(f"dim must be 1 or 2, got {dim}")
    if not (dxi > 0 and xi_max > 0):
        raise ValueError(f"dxi and xi_max must be positive (dxi={dxi}, xi_max={xi_max})")
    ratio = xi_max / dxi
    if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio) or round(ratio) < 1:
        raise ValueError(
            f"xi_max={xi_max} is not a positive integer multiple of dxi={dxi}"
        )
    return FrequencyGrid(int(dim), float(dxi), float(xi_max))


def flip(a: np.ndarray) -> np.ndarray:
    """Reflection ξ -> -ξ on grid-shaped arrays."""
    return a[(slice(None, None, -1),) * a.ndim]


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Nonnegative samples of û on ``grid`` scaled by ``2**exp2``."""

    grid: FrequencyGrid
    coeffs: np.ndarray
    exp2: int = 0
    even: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float, copy=True)
        if c.shape != self.grid.shape:
            raise InvariantError(f"coeffs shape {c.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(c)):
            raise InvariantError("coefficients must be finite")
        if c.size and c.min() < 0:
            raise InvariantError(f"negative coefficient {c.min()!r}")
        if self.even and not np.array_equal(c, flip(c)):
            raise InvariantError("field flagged even is not symmetric")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "exp2", int(self.exp2))

    def values(self) -> np.ndarray:
        """Represented values; overflows to inf for very large exponents."""
        return np.ldexp(self.coeffs, self.exp2)

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def log2_max(self) -> float:
        m = float(self.coeffs.max())
        return math.log2(m) + self.exp2 if m > 0 else NEG_INF

    def log2_values(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log2(self.coeffs) + self.exp2

    def replace(self, coeffs, exp2=None, even=None, meta=None) -> "SpectralField":
        return SpectralField(
            self.grid,
            coeffs,
            self.exp2 if exp2 is None else exp2,
            self.even if even is None else even,
            self.meta if meta is None else meta,
        )


def renormalize(f: SpectralField) -> SpectralField:
    """Rescale so the largest coefficient lies in [1/2, 1); values unchanged."""
    m = float(f.coeffs.max()) if f.coeffs.size else 0.0
    if m == 0.0:
        return f.replace(np.zeros(f.grid.shape), exp2=0)
    _, e = math.frexp(m)
    if e == 0:
        return f
    return f.replace(np.ldexp(f.coeffs, -e), exp2=f.exp2 + e)


def from_values(grid: FrequencyGrid, values, even=False, meta=None) -> SpectralField:
    return renormalize(SpectralField(grid, values, 0, even, meta or {}))


def zeros(grid: FrequencyGrid) -> SpectralField:
    return SpectralField(grid, grid.zeros(), 0, True)


def scale(f: SpectralField, factor: float) -> SpectralField:
    """Multiply by a positive (or zero) scalar."""
    if factor < 0 or not math.isfinite(factor):
        raise ValueError(f"scale factor must be finite and nonnegative, got {factor}")
    if factor == 0:
        return zeros(f.grid)
    mant, e = math.frexp(factor)
    return renormalize(f.replace(f.coeffs * mant, exp2=f.exp2 + e))


def scale_log2(f: SpectralField, bits: float) -> SpectralField:
    """Multiply by ``2**bits`` for arbitrarily large or small ``bits``."""
    whole = math.floor(bits)
    return renormalize(f.replace(f.coeffs * 2.0 ** (bits - whole), exp2=f.exp2 + whole))


def combine(grid: FrequencyGrid, terms, even=False) -> SpectralField:
    """Sum of ``coeffs * 2**exp2`` terms aligned to the largest exponent.

    Coefficients that underflow in the alignment flush to zero.
    """
    live = [(c, e) for c, e in terms if np.any(c)]
    if not live:
        return SpectralField(grid, grid.zeros(), 0, even)
    top = max(e for _, e in live)
    total = np.zeros(grid.shape)
    for c, e in live:
        total += c if e == top else np.ldexp(c, e - top)
    return renormalize(SpectralField(grid, total, top, even))


def add(f: SpectralField, g: SpectralField) -> SpectralField:
    _check_same_grid(f, g)
    return combine(f.grid, [(f.coeffs, f.exp2), (g.coeffs, g.exp2)], f.even and g.even)


def aligned(f: SpectralField, g: SpectralField) -> tuple[np.ndarray, np.ndarray, int]:
    """Both coefficient arrays expressed against a common exponent."""
    top = max(f.exp2, g.exp2)
    return np.ldexp(f.coeffs, f.exp2 - top), np.ldexp(g.coeffs, g.exp2 - top), top


def heat_factor(grid: FrequencyGrid, t: float) -> np.ndarray:
    return np.exp(-t * grid.radius_sq)


def heat_multiplier(f: SpectralField, t: float) -> SpectralField:
    """Apply the heat semigroup: multiply by ``exp(-t |ξ|²)``."""
    if t < 0:
        raise ValueError(f"heat multiplier needs t >= 0, got {t}")
    if t == 0:
        return f
    return renormalize(f.replace(f.coeffs * heat_factor(f.grid, t)))


def _check_same_grid(f, g):
    if f.grid != g.grid:
        raise GridMismatchError(f"fields live on different grids: {f.grid} vs {g.grid}")


def _fft_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    m = (n - 1) // 2
    shape = tuple(sfft.next_fast_len(2 * s, real=True) for s in a.shape)
    axes = tuple(range(a.ndim))
    window = (slice(m, m + n),) * a.ndim

    def lin(x, y):
        return sfft.irfftn(sfft.rfftn(x, shape, axes=axes) * sfft.rfftn(y, shape, axes=axes),
                           shape, axes=axes)[window]

    out = lin(a, b)
    # indicator convolution counts are integers, so > 1/2 is the exact Minkowski support
    support = lin((a > 0).astype(float), (b > 0).astype(float)) > 0.5
    return np.where(support & (out > 0), out, 0.0)


def _direct_convolve(a: np.ndarray, b: np.ndarray, same: bool) -> np.ndarray:
    if a.ndim == 1:
        return kernels.autoconv1d(a) if same else kernels.conv1d(a, b)
    return kernels.conv2d(a, b)


def resolve_method(grid: FrequencyGrid, method: str) -> str:
    if method == "auto":
        return "direct" if grid.dim == 1 or grid.n <= 129 else "fft"
    if method not in ("direct", "fft"):
        raise ValueError(f"unknown convolution method {method!r}")
    return method


def convolve(f: SpectralField, g: SpectralField, method: str = "auto") -> SpectralField:
    """Riemann-sum approximation of (f∗g)(ξ), truncated to the grid box.

    ``direct`` sums nonnegative products and is accurate bin by bin; ``fft``
    zero-pads each axis to at least twice its length and clamps roundoff,
    so it is accurate relative to the largest output value only.
    """
    _check_same_grid(f, g)
    grid = f.grid
    same = f is g or f.coeffs is g.coeffs
    if resolve_method(grid, method) == "direct":
        out = _direct_convolve(np.ascontiguousarray(f.coeffs), np.ascontiguousarray(g.coeffs), same)
    else:
        out = _fft_convolve(f.coeffs, g.coeffs)
    out *= grid.cell
    even = f.even and g.even
    if even:
        out = 0.5 * (out + flip(out))
    return renormalize(SpectralField(grid, out, f.exp2 + g.exp2, even))


def l1_mass(f: SpectralField) -> float:
    """log₂ of Σ coeffs·dxi^dim·2^exp2 (−inf for the zero field)."""
    s = math.fsum(f.coeffs.ravel())
    if s == 0:
        return NEG_INF
    return math.log2(s) + f.exp2 + f.grid.dim * math.log2(f.grid.dxi)


def log2_sum(values) -> float:
    """log₂ Σ 2**v for log-domain values (−inf entries are zeros)."""
    vals = [v for v in values if v != NEG_INF]
    if not vals:
        return NEG_INF
    top = max(vals)
    return top + math.log2(math.fsum(2.0 ** (v - top) for v in vals))


def log2_sup_diff(f: SpectralField, g: SpectralField) -> float:
    """log₂ of max |f - g| over the grid."""
    a, b, top = aligned(f, g)
    d = float(np.max(np.abs(a - b)))
    return math.log2(d) + top if d > 0 else NEG_INF


# serialization

def field_to_dict(f: SpectralField) -> dict:
    out = {
        "dim": f.grid.dim,
        "dxi": f.grid.dxi,
        "xi_max": f.grid.xi_max,
        "exp2": f.exp2,
        "coeffs": [float(x) for x in f.coeffs.ravel()],
    }
    if f.even:
        out["even"] = True
    if f.meta:
        out["meta"] = f.meta
    return out


def field_from_dict(d: dict) -> SpectralField:
    grid = make_grid(int(d["dim"]), float(d["dxi"]), float(d["xi_max"]))
    coeffs = np.asarray(d["coeffs"], dtype=float).reshape(grid.shape)
    return SpectralField(grid, coeffs, int(d.get("exp2", 0)), bool(d.get("even", False)),
                         dict(d.get("meta", {})))
