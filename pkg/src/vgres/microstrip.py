"""Vacuum-gap microstrip line parameters.

For a center conductor of width w under a ground plane suspended at height
h (vacuum dielectric, w >> h), the geometric inductance per unit length is
mu_0 h / w and the capacitance eps_0 w / h.  A filament-discretized
magnetic-flux calculation (:func:`sheet_inductance_oracle`) checks the
closed form and quantifies the fringe-field error it neglects.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import CONSTANTS
from .errors import DomainError, ModelAssumptionWarning

# h/w beyond this breaks the parallel-plate assumption badly enough to warn
MAX_GAP_TO_WIDTH = 0.25


@dataclass(frozen=True)
class MicrostripGeometry:
    """Vacuum gap h, conductor width w, resonator length l (m), and the
    film's sheet kinetic inductance (H per square)."""

    h: float
    w: float
    l: float
    sheet_kinetic_inductance: float

    def __post_init__(self):
        if not (self.h > 0 and self.w > 0 and self.l > 0):
            raise DomainError("h, w and l must be positive")
        if not (math.isfinite(self.sheet_kinetic_inductance)
                and self.sheet_kinetic_inductance >= 0):
            raise DomainError("sheet kinetic inductance must be >= 0")
        if self.h / self.w >= MAX_GAP_TO_WIDTH:
            warnings.warn(
                f"h/w = {self.h / self.w:.3g} is outside the h << w regime "
                "the closed-form line parameters assume",
                ModelAssumptionWarning)

    def line_parameters(self) -> dict:
        """Derived line quantities: inductances, capacitance, kinetic
        fraction, impedance, phase velocity and quarter-wave frequency."""
        l_geom = geometric_inductance_per_length(self.h, self.w)
        l_kin = kinetic_inductance_per_length(self.sheet_kinetic_inductance,
                                              self.w)
        c = capacitance_per_length(self.w, self.h)
        f_quarter, velocity, impedance = quarter_wave_frequency(
            l_geom + l_kin, c, self.l)
        return {
            "geometric_inductance_per_length": l_geom,
            "kinetic_inductance_per_length": l_kin,
            "kinetic_fraction": kinetic_fraction(l_kin, l_geom),
            "capacitance_per_length": c,
            "quarter_wave_frequency": f_quarter,
            "phase_velocity": velocity,
            "impedance": impedance,
        }


def geometric_inductance_per_length(h: float, w: float) -> float:
    """mu_0 h / w (H/m); valid for h << w."""
    if not (h > 0 and w > 0):
        raise DomainError("h and w must be positive")
    return CONSTANTS.mu_0 * h / w


def kinetic_inductance_per_length(sheet: float, w: float) -> float:
    """Sheet kinetic inductance (H/sq) divided by the conductor width (H/m)."""
    if not (math.isfinite(sheet) and sheet >= 0):
        raise DomainError("sheet inductance must be >= 0")
    if not w > 0:
        raise DomainError("width must be positive")
    return sheet / w


def kinetic_fraction(l_kin: float, l_geom: float) -> float:
    """alpha = L_kin / (L_kin + L_geom)."""
    if l_kin < 0 or l_geom < 0:
        raise DomainError("inductances must be >= 0")
    total = l_kin + l_geom
    if total == 0:
        raise DomainError("kinetic fraction undefined for zero total inductance")
    return l_kin / total


def capacitance_per_length(w: float, h: float) -> float:
    """eps_0 w / h (F/m), parallel-plate with vacuum dielectric."""
    if not (h > 0 and w > 0):
        raise DomainError("h and w must be positive")
    return CONSTANTS.eps_0 * w / h


def quarter_wave_frequency(l_total: float, c: float, length: float):
    """Quarter-wave resonance of a shorted line section.

    Returns (frequency Hz, phase velocity m/s, characteristic impedance ohm)
    for total inductance l_total (H/m), capacitance c (F/m) and physical
    length (m).
    """
    if not (l_total > 0 and c > 0 and length > 0):
        raise DomainError("inductance, capacitance and length must be positive")
    velocity = 1.0 / math.sqrt(l_total * c)
    impedance = math.sqrt(l_total / c)
    return velocity / (4.0 * length), velocity, impedance


def _filament_flux_integral(xi: float, h: float, w: float) -> float:
    """Integral over the overlap x in (-w/2, w/2) of the vertical-cut flux
    kernel ln(((x-xi)^2 + h^2)/(x-xi)^2) of a filament at x = xi."""
    def antiderivative(u):
        t = u * math.log(u * u + h * h) + 2.0 * h * math.atan(u / h)
        if u != 0.0:
            t -= 2.0 * u * math.log(abs(u))  # integrable log singularity
        return t

    return antiderivative(w / 2.0 - xi) - antiderivative(-w / 2.0 - xi)


def sheet_inductance_oracle(h: float, w: float, n_strips: int,
                            current: float = 1.0) -> float:
    """Geometric inductance per length from first principles (H/m).

    Two parallel plates separated by h carry equal and opposite currents,
    distributed uniformly over the overlap width w.  Each sheet is
    discretized into n_strips line filaments; the magnetic flux through the
    gap, averaged over the overlap, follows from superposing the exact
    per-filament flux integrals, and dividing by the current gives the
    inductance.  Converges monotonically from above toward the continuum
    value, which approaches mu_0 h / w as w/h grows; the deficit at finite
    w/h is the fringe-field error of the closed form.
    """
    if not (h > 0 and w > 0):
        raise DomainError("h and w must be positive")
    if n_strips < 100:
        raise DomainError(f"need n_strips >= 100, got {n_strips}")
    if current == 0 or not math.isfinite(current):
        raise DomainError("current must be finite and nonzero")
    d = w / n_strips
    total = 0.0
    for i in range(n_strips):
        xi = -w / 2.0 + (i + 0.5) * d
        total += _filament_flux_integral(xi, h, w)
    # top and bottom sheets contribute identically to the gap flux
    flux = current * CONSTANTS.mu_0 / (4.0 * math.pi * w) * (2.0 * total / n_strips)
    return flux / current
