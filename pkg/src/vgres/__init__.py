"""Characterization toolkit for vacuum-gap microstrip resonators.

Circle-fit extraction of quality factors from notch transmission sweeps,
photon-number calibration, TLS + thermal-quasiparticle temperature-model
fitting, vacuum-gap line-geometry calculators, and a batch pipeline with a
built-in synthetic-data oracle.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .core import (CONSTANTS, ComplexSweep, NotchFit, PhysicalConstants,
                   TemperatureSeries, TempModelParams, dbm_to_watts,
                   joules_to_microev, microev_to_joules, watts_to_dbm)
from .microstrip import (MicrostripGeometry, capacitance_per_length,
                         geometric_inductance_per_length, kinetic_fraction,
                         kinetic_inductance_per_length,
                         quarter_wave_frequency, sheet_inductance_oracle)
from .notch import (Circle, NotchParams, estimate_background, fit_circle,
                    fit_notch, internal_q, remove_background)
from .photon import (MeasurementChain, YFactorData, incident_power,
                     incident_power_from_gain, photon_number, y_factor)
from .pipeline import (EnvelopeCurve, RunConfig, bin_envelope, load_config,
                       run_power_sweep, run_temperature_study)
from .synth import (NoiseSpec, frequency_grid, synth_notch,
                    synth_temperature_series)
from .tempmodel import (EnsembleFit, FixAlpha, FixDelta, FixDeltaSweep,
                        complex_digamma, critical_temperature,
                        drop_onset_temperature, ensemble_statistics,
                        fit_temperature_sweep, model_shift, qp_shift,
                        tls_shift)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CONSTANTS", "Circle", "ComplexSweep", "EnsembleFit",
    "EnvelopeCurve", "FixAlpha", "FixDelta", "FixDeltaSweep", "KERNEL_BACKEND",
    "MeasurementChain", "MicrostripGeometry", "NoiseSpec", "NotchFit",
    "NotchParams", "PhysicalConstants", "RunConfig", "TemperatureSeries",
    "TempModelParams", "YFactorData", "bin_envelope", "capacitance_per_length",
    "complex_digamma", "critical_temperature", "dbm_to_watts",
    "drop_onset_temperature", "ensemble_statistics", "estimate_background",
    "fit_circle", "fit_notch", "fit_temperature_sweep", "frequency_grid",
    "geometric_inductance_per_length", "incident_power",
    "incident_power_from_gain", "internal_q", "joules_to_microev",
    "kinetic_fraction", "kinetic_inductance_per_length", "load_config",
    "microev_to_joules", "model_shift", "photon_number", "qp_shift",
    "quarter_wave_frequency", "remove_background", "run_power_sweep",
    "run_temperature_study", "sheet_inductance_oracle", "synth_notch",
    "synth_temperature_series", "tls_shift", "watts_to_dbm", "y_factor",
]
