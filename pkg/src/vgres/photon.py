"""Drive-power calibration and intracavity photon number.

The Y-factor method turns two noise-power readings against thermalized
loads into the gain and noise temperature of the measurement chain; the
photon number follows from the loaded and coupling quality factors and the
incident power:  n = 2 Q_l^2 P_inc / (|Q_c| hbar omega^2).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .core import CONSTANTS, dbm_to_watts
from .errors import DomainError, FlaggedResultWarning, UnphysicalMeasurementError


@dataclass(frozen=True)
class MeasurementChain:
    """Output-chain gain (dB), its noise temperature (K), and the total
    attenuation between instrument and sample (dB)."""

    gain_db: float
    noise_temperature: float
    input_attenuation_db: float

    def __post_init__(self):
        if not math.isfinite(self.gain_db):
            raise DomainError("gain_db must be finite")
        if not (math.isfinite(self.noise_temperature) and self.noise_temperature >= 0):
            raise DomainError("noise_temperature must be >= 0")
        if not math.isfinite(self.input_attenuation_db):
            raise DomainError("input_attenuation_db must be finite")


@dataclass(frozen=True)
class YFactorData:
    """Noise powers (W, integrated over bandwidth b) against hot and cold
    loads at known temperatures."""

    p_hot: float
    p_cold: float
    t_hot: float
    t_cold: float
    bandwidth: float

    def __post_init__(self):
        if not (self.p_hot > self.p_cold > 0.0):
            raise DomainError("need p_hot > p_cold > 0")
        if not (self.t_hot > self.t_cold > 0.0):
            raise DomainError("need t_hot > t_cold > 0")
        if not (math.isfinite(self.bandwidth) and self.bandwidth > 0.0):
            raise DomainError("bandwidth must be positive")


def _planck_temperature(t: float, f: float) -> float:
    """Planck-occupation effective temperature,
    (h f / k_B) (1/(exp(h f / k_B T) - 1) + 1/2)."""
    x = CONSTANTS.h * f / (CONSTANTS.k_B * t)
    return (CONSTANTS.h * f / CONSTANTS.k_B) * (1.0 / math.expm1(x) + 0.5)


def y_factor(data: YFactorData, planck_frequency: float | None = None):
    """Gain (linear) and noise temperature (K) of the measurement chain.

    Y = p_hot/p_cold; T_e = (t_hot - Y t_cold)/(Y - 1);
    gain = p_cold / (k_B (t_cold + T_e) b).

    The default noise model is classical (k_B T b).  Passing
    ``planck_frequency`` replaces each load temperature by its Planck
    occupation equivalent at that frequency before the formulas above; at
    20 mK and a few GHz the classical assumption is marginal.

    A negative T_e (measurement inconsistent with the linear model) is
    returned but flagged with FlaggedResultWarning.
    """
    t_hot, t_cold = data.t_hot, data.t_cold
    if planck_frequency is not None:
        if not (math.isfinite(planck_frequency) and planck_frequency > 0):
            raise DomainError("planck_frequency must be positive")
        t_hot = _planck_temperature(t_hot, planck_frequency)
        t_cold = _planck_temperature(t_cold, planck_frequency)
    y = data.p_hot / data.p_cold
    if y <= 1.0:
        raise UnphysicalMeasurementError(
            f"Y factor {y:.6g} <= 1; hot load must give more noise power")
    t_e = (t_hot - y * t_cold) / (y - 1.0)
    if t_e < 0.0:
        warnings.warn(f"negative noise temperature {t_e:.4g} K: measurement "
                      "inconsistent with the linear noise model",
                      FlaggedResultWarning)
    gain = data.p_cold / (CONSTANTS.k_B * (t_cold + t_e) * data.bandwidth)
    return gain, t_e


def incident_power(drive_dbm: float, input_attenuation_db: float) -> float:
    """Power reaching the sample given the drive level and the attenuation
    of the input line (W)."""
    if not (math.isfinite(drive_dbm) and math.isfinite(input_attenuation_db)):
        raise DomainError("drive power and attenuation must be finite")
    return dbm_to_watts(drive_dbm - input_attenuation_db)


def incident_power_from_gain(drive_dbm: float, offres_transmission: float,
                             gain: float) -> float:
    """Power at the sample referenced to the measured output gain.

    With unit off-resonant sample transmission, the end-to-end level
    |S21_offres| equals (input attenuation) x (output gain), so
    P_inc = P_drive |S21_offres|^2 / gain  with amplitude quantities
    squared into power.
    """
    if not (math.isfinite(offres_transmission) and offres_transmission > 0):
        raise DomainError("off-resonant transmission must be positive")
    if not (math.isfinite(gain) and gain > 0):
        raise DomainError("gain must be positive")
    return dbm_to_watts(drive_dbm) * offres_transmission ** 2 / gain


def photon_number(q_l: float, q_c_mag: float, f_r: float, p_inc: float) -> float:
    """Average intracavity photon number under coherent drive:
    n = 2 Q_l^2 P_inc / (|Q_c| hbar (2 pi f_r)^2)."""
    if not (q_l > 0 and q_c_mag > 0 and f_r > 0):
        raise DomainError("q_l, q_c_mag and f_r must be positive")
    if not (math.isfinite(p_inc) and p_inc >= 0.0):
        raise DomainError(f"incident power must be >= 0, got {p_inc}")
    omega = 2.0 * math.pi * f_r
    return 2.0 * q_l * q_l * p_inc / (q_c_mag * CONSTANTS.hbar * omega * omega)
