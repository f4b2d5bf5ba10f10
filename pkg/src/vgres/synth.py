"""Forward-model generators for synthetic notch sweeps and temperature series.

These serve as the independent oracle for every fitting routine: generate
from known parameters, fit, compare.  All randomness comes from the seeded
xorshift64* / polar-method stream in :mod:`vgres._kernels`, so identical
seeds give byte-identical data on every platform and backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import ComplexSweep, TemperatureSeries, TempModelParams
from .errors import DomainError
from .notch import NotchParams
from .tempmodel import model_shift


@dataclass(frozen=True)
class NoiseSpec:
    """Additive complex Gaussian noise: ``complex_sigma`` is the standard
    deviation of each quadrature (real and imaginary part independently)."""

    complex_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.complex_sigma) and self.complex_sigma >= 0.0):
            raise DomainError(f"complex_sigma must be >= 0, got {self.complex_sigma}")


def frequency_grid(f_r: float, q_l: float, span_linewidths: float = 40.0,
                   n_points: int = 801) -> np.ndarray:
    """Symmetric grid around f_r spanning the given number of linewidths."""
    if f_r <= 0 or q_l <= 0 or span_linewidths <= 0 or n_points < 8:
        raise DomainError("invalid grid request")
    half = 0.5 * span_linewidths * f_r / q_l
    return np.linspace(f_r - half, f_r + half, n_points)


def synth_notch(params: NotchParams, grid, noise: NoiseSpec = NoiseSpec(),
                drive_power_dbm: float | None = None) -> ComplexSweep:
    """Evaluate the notch model on the grid and add seeded complex noise."""
    f = np.asarray(grid, dtype=float)
    if params.q_l <= 0:
        raise DomainError(f"q_l must be positive, got {params.q_l}")
    depth = params.q_l / params.q_c_mag
    if not 0.0 <= depth <= 1.0:
        raise DomainError(f"q_l/|q_c| must be in [0, 1], got {depth}")
    if not (f[0] <= params.f_r <= f[-1]):
        raise DomainError(f"f_r={params.f_r} outside grid "
                          f"[{f[0]}, {f[-1]}]")
    s21 = params.evaluate(f)
    if noise.complex_sigma > 0.0:
        g = _kernels.normal_stream(2 * f.size, noise.seed)
        s21 = s21 + noise.complex_sigma * (g[0::2] + 1j * g[1::2])
    return ComplexSweep(frequencies=f, s21=s21, drive_power_dbm=drive_power_dbm)


def synth_temperature_series(params: TempModelParams, temperatures,
                             noise_sigma: float = 0.0,
                             seed: int = 0) -> TemperatureSeries:
    """f(T) = f0 (1 + model_shift(T)) with seeded multiplicative jitter.

    ``noise_sigma`` is the relative frequency jitter per point.  The
    returned series carries the generating model's f0 as its reference.
    """
    t = np.asarray(temperatures, dtype=float)
    if not (math.isfinite(noise_sigma) and noise_sigma >= 0.0):
        raise DomainError(f"noise_sigma must be >= 0, got {noise_sigma}")
    f = params.f0 * (1.0 + model_shift(t, params))
    if noise_sigma > 0.0:
        g = _kernels.normal_stream(t.size, seed)
        f = f * (1.0 + noise_sigma * g)
    return TemperatureSeries(temperatures=t, frequencies=f, f0=params.f0)
