"""Mild solutions of ∂ₜu = Δu + √(-Δ)(u²) on the Fourier side.

The Duhamel map reads

    Ĝ(u)_t(ξ) = e^{-t|ξ|²} û₀(ξ) + ∫₀ᵗ e^{(s-t)|ξ|²} |ξ| (û_s∗û_s)(ξ) ds.

``etd1`` propagates the linear part exactly and freezes the nonlinearity at
the left endpoint, so each step is a sum of nonnegative terms.  ``etd2``
(Cox-Matthews ETD2RK) is written as a nonnegative combination of the
nonlinearity at the current state and at the etd1 predictor.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .besov import block_masses, besov_norm, shell_index, shell_masses
from .spectral import (
    NEG_INF,
    FrequencyGrid,
    InvariantError,
    SpectralField,
    aligned,
    combine,
    convolve,
    heat_factor,
    heat_multiplier,
    l1_mass,
    log2_sup_diff,
)

SERIES_CUTOFF = 1e-8


class NonFiniteError(FloatingPointError):
    def __init__(self, step, detail=""):
        super().__init__(f"non-finite coefficient at step {step}" + (f": {detail}" if detail else ""))
        self.step = step


@dataclass(frozen=True)
class SchemeSpec:
    kind: str = "etd1"
    dt: float = 1e-4

    def __post_init__(self):
        if self.kind not in ("etd1", "etd2"):
            raise ValueError(f"unknown scheme {self.kind!r}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")


def phi1(x: np.ndarray) -> np.ndarray:
    """(1 - e^{-x}) / x with the limit 1 at x = 0."""
    x = np.asarray(x, dtype=float)
    small = x < SERIES_CUTOFF
    safe = np.where(small, 1.0, x)
    return np.where(small, 1.0 - x / 2.0, -np.expm1(-safe) / safe)


def phi2(x: np.ndarray) -> np.ndarray:
    """(x - 1 + e^{-x}) / x²."""
    x = np.asarray(x, dtype=float)
    small = x < 1e-3
    safe = np.where(small, 1.0, x)
    series = 0.5 - x / 6.0 + x * x / 24.0 - x ** 3 / 120.0 + x ** 4 / 720.0
    return np.where(small, series, (safe + np.expm1(-safe)) / (safe * safe))


def phi1_minus_phi2(x: np.ndarray) -> np.ndarray:
    """(1 - e^{-x}(1 + x)) / x², nonnegative for x >= 0."""
    x = np.asarray(x, dtype=float)
    small = x < 1e-3
    safe = np.where(small, 1.0, x)
    series = 0.5 - x / 3.0 + x * x / 8.0 - x ** 3 / 30.0 + x ** 4 / 144.0
    return np.where(small, series, -(np.expm1(-safe) + safe * np.exp(-safe)) / (safe * safe))


@dataclass(frozen=True)
class _Weights:
    decay: np.ndarray
    w_now: np.ndarray
    w_pred: np.ndarray | None


@lru_cache(maxsize=32)
def _weights(grid: FrequencyGrid, kind: str, dt: float) -> _Weights:
    x = dt * grid.radius_sq
    r = grid.radius
    decay = heat_factor(grid, dt)
    if kind == "etd1":
        # |ξ|·q(ξ) with q = (1 - e^{-dt|ξ|²}) / |ξ|², q(0) = dt
        return _Weights(decay, r * dt * phi1(x), None)
    return _Weights(decay, r * dt * phi1_minus_phi2(x), r * dt * phi2(x))


def _check_nonneg(f: SpectralField):
    # SpectralField validates on construction; this guards foreign arrays too
    if f.coeffs.size and f.coeffs.min() < 0:
        raise InvariantError("negative coefficient entering a Duhamel step")


def duhamel_step(f: SpectralField, scheme: SchemeSpec, nonlinear: bool = True,
                 method: str = "auto") -> SpectralField:
    """Advance ``f`` by one time step of length ``scheme.dt``."""
    _check_nonneg(f)
    if not nonlinear:
        return heat_multiplier(f, scheme.dt)
    grid = f.grid
    w = _weights(grid, scheme.kind, scheme.dt)
    nf = convolve(f, f, method)
    terms = [(f.coeffs * w.decay, f.exp2), (nf.coeffs * w.w_now, nf.exp2)]
    even = f.even
    if scheme.kind == "etd2":
        pw = _weights(grid, "etd1", scheme.dt)
        pred = combine(grid, [(f.coeffs * pw.decay, f.exp2), (nf.coeffs * pw.w_now, nf.exp2)], even)
        # both etd1 terms are nonnegative, so this clamp never fires
        pred = pred.replace(np.maximum(pred.coeffs, 0.0))
        npred = convolve(pred, pred, method)
        terms.append((npred.coeffs * w.w_pred, npred.exp2))
    return combine(grid, terms, even)


def flush_tiny(f: SpectralField, bits: float) -> SpectralField:
    """Zero coefficients below 2^{-bits} of the (renormalized) maximum."""
    c = f.coeffs
    thresh = math.ldexp(float(c.max()), -int(bits)) if c.size else 0.0
    if thresh == 0 or not np.any((c > 0) & (c < thresh)):
        return f
    return f.replace(np.where(c < thresh, 0.0, c))


# trajectories

@dataclass
class Trajectory:
    times: list[float] = field(default_factory=list)
    snapshots: list[SpectralField] = field(default_factory=list)
    diagnostics: list[dict] = field(default_factory=list)
    a_list: tuple[float, ...] = ()
    termination: str = "completed"
    blowup_time: float | None = None
    blowup_bits: float | None = None
    steps: int = 0

    def at(self, t: float, tol: float = 1e-12) -> SpectralField:
        for ti, snap in zip(self.times, self.snapshots):
            if abs(ti - t) <= tol * max(1.0, abs(t)):
                return snap
        raise KeyError(f"no snapshot recorded at t={t}")

    @property
    def blew_up(self) -> bool:
        return self.termination == "numeric_blowup"

    def termination_label(self) -> str:
        if self.blew_up:
            return f"numeric_blowup(time={self.blowup_time:.17g},bits={self.blowup_bits:.17g})"
        return self.termination

    def to_csv(self) -> str:
        grid = self.snapshots[0].grid if self.snapshots else None
        shells = _shell_keys(grid) if grid else []
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "exp2", "log2_max", "log2_mass"]
                   + [f"besov_a={_fmt(a)}" for a in self.a_list]
                   + [f"shell_{k}" for k in shells])
        for t, d in zip(self.times, self.diagnostics):
            w.writerow([_fmt(t), str(d["exp2"]), _fmt(d["log2_max"]), _fmt(d["log2_mass"])]
                       + [_fmt(d["besov"][a]) for a in self.a_list]
                       + [_fmt(d["shells"].get(k, NEG_INF)) for k in shells])
        buf.write(f"# termination={self.termination_label()}\n")
        return buf.getvalue()


def _fmt(x: float) -> str:
    if isinstance(x, int):
        return str(x)
    if x == NEG_INF:
        return "-inf"
    return f"{x:.17g}"


def _shell_keys(grid: FrequencyGrid) -> list[int]:
    idx = shell_index(grid)
    return list(range(int(idx.min()), int(idx.max()) + 1))


def diagnose(f: SpectralField, a_list) -> dict:
    blocks = block_masses(f)
    return {
        "exp2": f.exp2,
        "log2_max": f.log2_max(),
        "log2_mass": l1_mass(f),
        "besov": {a: besov_norm(f, a, blocks).norm_log2 for a in a_list},
        "shells": shell_masses(f),
    }


def simulate(u0: SpectralField, T: float, scheme: SchemeSpec = SchemeSpec(), *,
             stride: int = 100, bit_budget: float = 4096.0, a_list=(-1.0, 0.0, 1.0),
             checkpoints=(), nonlinear: bool = True, method: str = "auto",
             flush_bits: float = 500.0) -> Trajectory:
    """Integrate from ``u0`` to time ``T`` with fixed steps of ``scheme.dt``.

    Snapshots are recorded every ``stride`` steps, at every time in
    ``checkpoints`` (the step is split to land on it exactly) and at the end.
    Integration stops with ``numeric_blowup`` once log₂ of the largest value
    exceeds ``bit_budget``.  Coefficients more than ``flush_bits`` below the
    field maximum are dropped after each step, which only lowers the
    solution and keeps the kernels away from subnormal arithmetic.
    """
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    dt = scheme.dt
    a_list = tuple(float(a) for a in a_list)
    traj = Trajectory(a_list=a_list)

    def record(t, f):
        traj.times.append(float(t))
        traj.snapshots.append(f)
        traj.diagnostics.append(diagnose(f, a_list))

    def advance(f, h, step_no):
        spec = scheme if h == dt else SchemeSpec(scheme.kind, h)
        try:
            out = duhamel_step(f, spec, nonlinear, method)
        except InvariantError as exc:
            raise NonFiniteError(step_no, str(exc)) from exc
        if nonlinear and flush_bits:
            out = flush_tiny(out, flush_bits)
        return out

    f = u0
    record(0.0, f)
    t, prev_n, step_no = 0.0, 0, 0
    for target, n, is_cp in _events(T, dt, checkpoints):
        h = dt if n is not None and prev_n == n - 1 else target - t
        step_no += 1
        f = advance(f, h, step_no)
        t, prev_n = target, n
        if _over_budget(f, bit_budget):
            return _blowup(traj, t, f, step_no, record)
        if is_cp or target == T or (n is not None and n % stride == 0):
            record(t, f)
    traj.steps = step_no
    return traj


def _events(T, dt, checkpoints):
    """(time, regular step index or None, is_checkpoint) in increasing time."""
    tol = 1e-12 * max(1.0, T)
    n_total = int(math.floor(T / dt + 1e-9))
    regular = {n: n * dt for n in range(1, n_total + 1)}
    if n_total and abs(regular[n_total] - T) <= tol:
        regular[n_total] = T
    events = {t: [n, False] for n, t in regular.items()}
    if T not in events:
        events[T] = [None, False]
    for c in checkpoints:
        c = float(c)
        if not 0 < c <= T:
            continue
        near = [t for t in events if abs(t - c) <= tol]
        if near:
            events[near[0]][1] = True
        else:
            events[c] = [None, True]
    return [(t, n, cp) for t, (n, cp) in sorted(events.items())]


def _over_budget(f: SpectralField, budget: float) -> bool:
    return f.log2_max() > budget


def _blowup(traj, t, f, step_no, record):
    if not (traj.times and traj.times[-1] == t):
        record(t, f)
    traj.termination = "numeric_blowup"
    traj.blowup_time = float(t)
    traj.blowup_bits = f.log2_max()
    traj.steps = step_no
    return traj


# Picard iteration

@dataclass
class PicardResult:
    trajectory: Trajectory
    residuals: list[float]
    status: str
    diverged_at: int | None = None

    @property
    def ratios_log2(self) -> list[float]:
        r = self.residuals
        return [r[m] - r[m - 1] for m in range(1, len(r))]


def picard_iterate(u0: SpectralField, T: float, steps: int, iters: int, *,
                   bit_budget: float = 4096.0, method: str = "auto",
                   converged_bits: float = 50.0, a_list=(-1.0, 0.0, 1.0)) -> PicardResult:
    """Fixed-point iteration v ← Ĝ(v) on the time grid t_n = n·T/steps.

    v⁽⁰⁾ is the heat flow of ``u0``; Ĝ uses the etd1 quadrature, so the fixed
    point is the etd1 trajectory.  ``residuals[m]`` is log₂ of
    sup_{n,ξ} |v⁽ᵐ⁺¹⁾ - v⁽ᵐ⁾| (sup over the time grid only).  Iteration
    stops early when the residual drops ``converged_bits`` below the size of
    the iterate (roundoff level), and reports divergence when an iterate or
    residual exceeds ``bit_budget``.
    """
    if steps < 1 or iters < 1:
        raise ValueError("steps and iters must be >= 1")
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    dt = T / steps
    grid = u0.grid
    w = _weights(grid, "etd1", dt)
    v = [heat_multiplier(u0, n * dt) for n in range(steps + 1)]
    residuals: list[float] = []
    status = "max_iter"
    diverged_at = None
    for m in range(iters):
        g = [u0]
        for n in range(steps):
            nv = convolve(v[n], v[n], method)
            g.append(combine(grid, [(g[n].coeffs * w.decay, g[n].exp2),
                                    (nv.coeffs * w.w_now, nv.exp2)], u0.even))
        res = max(log2_sup_diff(a, b) for a, b in zip(g, v))
        size = max(x.log2_max() for x in g)
        residuals.append(res)
        v = g
        if res > bit_budget or size > bit_budget:
            status, diverged_at = "diverged", m
            break
        if res == NEG_INF or res < size - converged_bits:
            status = "converged"
            break
    traj = Trajectory(a_list=tuple(float(a) for a in a_list), steps=steps)
    for n, f in enumerate(v):
        traj.times.append(n * dt)
        traj.snapshots.append(f)
        traj.diagnostics.append(diagnose(f, traj.a_list))
    if status == "max_iter" and len(residuals) > 1 and residuals[-1] > residuals[0]:
        status, diverged_at = "diverged", len(residuals) - 1
    return PicardResult(traj, residuals, status, diverged_at)


# comparison principle

@dataclass(frozen=True)
class MonotoneViolation:
    index: tuple[int, ...]
    lower_log2: float
    upper_log2: float


def compare_monotone(f: SpectralField, g: SpectralField, scheme: SchemeSpec = SchemeSpec(),
                     rtol: float = 1e-12, method: str = "auto") -> MonotoneViolation | None:
    """Check step(f) <= step(g) pointwise for 0 <= f <= g; ``None`` means pass."""
    a, b, _ = aligned(f, g)
    if np.any(a > b):
        i = tuple(int(x) for x in np.unravel_index(np.argmax(a - b), a.shape))
        raise ValueError(f"precondition f <= g violated at bin {i}")
    sf = duhamel_step(f, scheme, method=method)
    sg = duhamel_step(g, scheme, method=method)
    a, b, _ = aligned(sf, sg)
    bad = a > b * (1.0 + rtol)
    if not np.any(bad):
        return None
    i = tuple(int(x) for x in np.argwhere(bad)[0])
    return MonotoneViolation(i, float(sf.log2_values()[i]), float(sg.log2_values()[i]))
