"""Shared domain types, physical constants, and unit conversions.

Everything internal to the package is strict SI (Hz, J, K, W, m).  dBm,
micro-eV, GHz and mK appear only at interfaces, through the conversion
helpers below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA 2018 values, SI units. h, k_B and eV are exact by definition."""

    h: float = 6.62607015e-34        # Planck constant, J s
    hbar: float = 6.62607015e-34 / (2.0 * math.pi)  # J s
    k_B: float = 1.380649e-23        # Boltzmann constant, J/K
    mu_0: float = 1.25663706212e-6   # vacuum permeability, N/A^2
    eps_0: float = 8.8541878128e-12  # vacuum permittivity, F/m
    eV: float = 1.602176634e-19      # electronvolt, J


CONSTANTS = PhysicalConstants()

# Temperatures below this are rejected in measured series; the apparatus
# cannot thermalize samples there and the fit model is meaningless.
TEMPERATURE_FLOOR_K = 0.010


def _readonly(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


def dbm_to_watts(p_dbm: float) -> float:
    """Convert a power level in dBm to watts."""
    if not math.isfinite(p_dbm):
        raise DomainError(f"power must be finite, got {p_dbm!r} dBm")
    return 1e-3 * 10.0 ** (p_dbm / 10.0)


def watts_to_dbm(p_w: float) -> float:
    """Convert a power in watts to dBm."""
    if not (math.isfinite(p_w) and p_w > 0.0):
        raise DomainError(f"power must be finite and positive, got {p_w!r} W")
    return 10.0 * math.log10(p_w / 1e-3)


def microev_to_joules(e_uev: float) -> float:
    """Convert an energy in micro-electronvolts to joules."""
    if not (math.isfinite(e_uev) and e_uev >= 0.0):
        raise DomainError(f"energy must be finite and >= 0, got {e_uev!r} ueV")
    return e_uev * 1e-6 * CONSTANTS.eV


def joules_to_microev(e_j: float) -> float:
    """Convert an energy in joules to micro-electronvolts."""
    if not math.isfinite(e_j):
        raise DomainError(f"energy must be finite, got {e_j!r} J")
    return e_j / (1e-6 * CONSTANTS.eV)


@dataclass(frozen=True)
class ComplexSweep:
    """One complex transmission trace over a strictly increasing frequency grid.

    Parameters
    ----------
    frequencies : array of float, Hz, strictly increasing, length >= 8.
    s21 : array of complex, same length, all finite.
    drive_power_dbm : optional drive power at the instrument output.
    """

    frequencies: np.ndarray
    s21: np.ndarray
    drive_power_dbm: float | None = None

    def __post_init__(self):
        f = _readonly(self.frequencies, np.float64)
        z = _readonly(self.s21, np.complex128)
        if f.ndim != 1 or z.ndim != 1 or f.size != z.size:
            raise DomainError("frequencies and s21 must be 1-d arrays of equal length")
        if f.size < 8:
            raise DomainError(f"sweep needs at least 8 points, got {f.size}")
        if not np.all(np.isfinite(f)) or not np.all(np.isfinite(z)):
            raise DomainError("sweep contains non-finite values")
        if not np.all(np.diff(f) > 0.0):
            raise DomainError("frequencies must be strictly increasing")
        if self.drive_power_dbm is not None and not math.isfinite(self.drive_power_dbm):
            raise DomainError("drive_power_dbm must be finite or None")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "s21", z)

    def __len__(self) -> int:
        return int(self.frequencies.size)

    @property
    def span(self) -> tuple[float, float]:
        return float(self.frequencies[0]), float(self.frequencies[-1])


@dataclass(frozen=True)
class NotchFit:
    """Extracted notch-resonator parameters plus the fitted background."""

    f_r: float               # resonance frequency, Hz
    q_l: float               # loaded quality factor
    q_c_mag: float           # coupling quality factor magnitude
    phi: float               # impedance mismatch angle, rad
    q_int: float             # internal quality factor
    background_amp: float
    background_phase: float  # rad
    cable_delay: float       # s
    residual_rms: float

    def __post_init__(self):
        vals = [self.f_r, self.q_l, self.q_c_mag, self.phi, self.q_int,
                self.background_amp, self.background_phase, self.cable_delay,
                self.residual_rms]
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("notch fit parameters must be finite")
        if self.f_r <= 0 or self.q_l <= 0 or self.q_c_mag <= 0 or self.q_int <= 0:
            raise DomainError("f_r and quality factors must be positive")
        if abs(self.phi) >= math.pi / 2:
            raise DomainError(f"|phi| must be < pi/2, got {self.phi}")
        if 1.0 / self.q_l < math.cos(self.phi) / self.q_c_mag:
            raise DomainError("1/q_l >= cos(phi)/q_c_mag violated; q_int undefined")

    @property
    def tan_delta(self) -> float:
        """Loss tangent read-out, 1/Q_int."""
        return 1.0 / self.q_int


@dataclass(frozen=True)
class TemperatureSeries:
    """Fitted resonance frequency versus stage temperature for one resonator.

    f0 is the reference used for relative shifts; measured series use the
    fitted resonance at the lowest temperature, synthetic series carry the
    generating model's own reference.
    """

    temperatures: np.ndarray  # K, strictly increasing
    frequencies: np.ndarray   # Hz
    f0: float                 # Hz

    def __post_init__(self):
        t = _readonly(self.temperatures, np.float64)
        f = _readonly(self.frequencies, np.float64)
        if t.ndim != 1 or f.ndim != 1 or t.size != f.size or t.size == 0:
            raise DomainError("temperatures and frequencies must be 1-d, equal length, non-empty")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(f))):
            raise DomainError("temperature series contains non-finite values")
        if np.any(t < TEMPERATURE_FLOOR_K):
            raise DomainError(
                f"temperatures below {TEMPERATURE_FLOOR_K * 1e3:.0f} mK are rejected")
        if not np.all(np.diff(t) > 0.0):
            raise DomainError("temperatures must be strictly increasing")
        if not (math.isfinite(self.f0) and self.f0 > 0.0):
            raise DomainError("f0 must be positive and finite")
        object.__setattr__(self, "temperatures", t)
        object.__setattr__(self, "frequencies", f)

    def __len__(self) -> int:
        return int(self.temperatures.size)

    @property
    def relative_shift(self) -> np.ndarray:
        """(f(T) - f0) / f0."""
        return (self.frequencies - self.f0) / self.f0


# Fields of the temperature model that can be fitted or fixed.
TEMP_MODEL_FIELDS = ("f_tan_delta", "delta_0", "alpha")


@dataclass(frozen=True)
class TempModelParams:
    """Parameters of the TLS + thermal-quasiparticle frequency-shift model.

    delta_0 is the superconducting gap at T = 0 in joules (interfaces speak
    micro-eV), alpha the kinetic inductance fraction, f_tan_delta the
    filling-factor-weighted loss tangent.
    """

    f_tan_delta: float
    delta_0: float            # J
    alpha: float
    f0: float                 # Hz
    fixed: tuple[str, ...] = ()
    uncertainties: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (math.isfinite(self.f_tan_delta) and self.f_tan_delta >= 0.0):
            raise DomainError(f"f_tan_delta must be >= 0, got {self.f_tan_delta}")
        if not (math.isfinite(self.delta_0) and self.delta_0 > 0.0):
            raise DomainError(f"delta_0 must be > 0, got {self.delta_0}")
        if not (math.isfinite(self.alpha) and 0.0 <= self.alpha <= 1.0):
            raise DomainError(f"alpha must be in [0, 1], got {self.alpha}")
        if not (math.isfinite(self.f0) and self.f0 > 0.0):
            raise DomainError(f"f0 must be > 0, got {self.f0}")
        bad = set(self.fixed) - set(TEMP_MODEL_FIELDS)
        if bad:
            raise DomainError(f"unknown fixed fields: {sorted(bad)}")
        object.__setattr__(self, "fixed", tuple(self.fixed))
        object.__setattr__(self, "uncertainties", dict(self.uncertainties))

    def replace(self, **kwargs) -> "TempModelParams":
        cur = dict(f_tan_delta=self.f_tan_delta, delta_0=self.delta_0,
                   alpha=self.alpha, f0=self.f0, fixed=self.fixed,
                   uncertainties=self.uncertainties)
        cur.update(kwargs)
        return TempModelParams(**cur)

    @property
    def free(self) -> tuple[str, ...]:
        return tuple(n for n in TEMP_MODEL_FIELDS if n not in self.fixed)
