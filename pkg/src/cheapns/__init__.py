"""Fourier-side laboratory for the cheap Navier-Stokes equation ∂ₜu = Δu + √(-Δ)(u²)."""
__version__ = "0.1.0"

from .kernels import BACKEND
from .spectral import (
    FrequencyGrid,
    SpectralField,
    convolve,
    heat_multiplier,
    l1_mass,
    make_grid,
    renormalize,
)
from .solver import SchemeSpec, Trajectory, duhamel_step, picard_iterate, simulate

__all__ = [
    "BACKEND",
    "FrequencyGrid",
    "SchemeSpec",
    "SpectralField",
    "Trajectory",
    "convolve",
    "duhamel_step",
    "heat_multiplier",
    "l1_mass",
    "make_grid",
    "picard_iterate",
    "renormalize",
    "simulate",
]
