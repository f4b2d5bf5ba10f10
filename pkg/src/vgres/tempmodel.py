"""Temperature dependence of the resonance frequency and its fitting.

The relative shift (f(T) - f0)/f0 is the sum of two terms:

* a two-level-system term,
  (F tan(delta) / pi) * (Re[psi(1/2 + h f / (2 i pi k_B T))] - ln(h f / (2 pi k_B T))),
  which vanishes as T -> 0, dips to a shallow interior minimum near
  h f / (2 pi k_B T) ~ 0.36, and then grows logarithmically, and

* a thermal-quasiparticle term,
  -(alpha/2) sqrt(pi Delta0 / (2 k_B T)) exp(-Delta0 / (k_B T)),
  which is negligible at low T and drives the steep high-temperature drop.

Fitting follows the protocol of fixing either the kinetic inductance
fraction alpha or the gap Delta0; sweeping Delta0 over a list turns the
induced spread of the other parameters into their uncertainty.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import (CONSTANTS, TEMP_MODEL_FIELDS, TemperatureSeries,
                   TempModelParams)
from .errors import (ClampedParameterWarning, DomainError,
                     InconsistentEnsembleError, NoSignalError)
from .lm import least_squares_lm

MIN_FIT_POINTS = 5
BCS_GAP_RATIO = 3.53


def complex_digamma(z) -> complex | np.ndarray:
    """Digamma function for complex arguments (scalar or array).

    Accurate to better than 1e-12 relative for |z| <= 1e6 away from the
    poles at the non-positive integers, which raise DomainError.
    """
    arr = np.asarray(z, dtype=np.complex128)
    on_axis = arr.imag == 0.0
    at_pole = on_axis & (arr.real <= 0.0) & (arr.real == np.floor(arr.real))
    if np.any(at_pole):
        raise DomainError("digamma pole at non-positive integer argument")
    return _kernels.digamma(z)


def tls_shift(f: float, t, f_tan_delta: float):
    """Relative frequency shift from two-level systems at frequency f (Hz)
    and temperature t (K). Scalar or array in t."""
    if not (math.isfinite(f) and f > 0.0):
        raise DomainError(f"frequency must be positive, got {f}")
    if not (math.isfinite(f_tan_delta) and f_tan_delta >= 0.0):
        raise DomainError(f"f_tan_delta must be >= 0, got {f_tan_delta}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0.0):
        raise DomainError("temperature must be positive")
    y = CONSTANTS.h * f / (2.0 * math.pi * CONSTANTS.k_B * t_arr)
    psi = _kernels.digamma(0.5 - 1j * y)
    out = (f_tan_delta / math.pi) * (np.real(psi) - np.log(y))
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def qp_shift(t, alpha: float, delta_0: float):
    """Relative frequency shift from thermal quasiparticles.

    -(alpha/2) sqrt(pi Delta0/(2 k_B T)) exp(-Delta0/(k_B T)); always <= 0,
    underflows to -0 at low temperature."""
    if not (math.isfinite(alpha) and 0.0 <= alpha <= 1.0):
        raise DomainError(f"alpha must be in [0, 1], got {alpha}")
    if not (math.isfinite(delta_0) and delta_0 > 0.0):
        raise DomainError(f"delta_0 must be positive, got {delta_0}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0.0):
        raise DomainError("temperature must be positive")
    u = delta_0 / (CONSTANTS.k_B * t_arr)
    out = -(alpha / 2.0) * np.sqrt(math.pi * u / 2.0) * np.exp(-u)
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def model_shift(t, params: TempModelParams):
    """(f(T) - f0)/f0: TLS term plus quasiparticle term, summed in this
    fixed order so results are bitwise reproducible."""
    return tls_shift(params.f0, t, params.f_tan_delta) + \
        qp_shift(t, params.alpha, params.delta_0)


def critical_temperature(delta_0: float) -> float:
    """Critical temperature from the weak-coupling gap relation
    T_c = 2 Delta0 / (3.53 k_B)."""
    if not (math.isfinite(delta_0) and delta_0 >= 0.0):
        raise DomainError(f"delta_0 must be >= 0, got {delta_0}")
    return 2.0 * delta_0 / (BCS_GAP_RATIO * CONSTANTS.k_B)


def drop_onset_temperature(params: TempModelParams, t_grid,
                           threshold: float = -1e-5):
    """Onset of the steep high-temperature frequency drop.

    Returns the first grid temperature from which the shift stays below
    ``threshold`` for all higher grid points (the terminal descent).  The
    shallow TLS dip at low temperature can cross the threshold transiently
    and does not count as the drop.  Returns None if the shift never ends
    below threshold.
    """
    t = np.asarray(t_grid, dtype=float)
    shift = model_shift(t, params)
    below = shift < threshold
    if not below[-1]:
        return None
    # last index where the curve is still above threshold
    above = np.where(~below)[0]
    start = above[-1] + 1 if len(above) else 0
    return float(t[start])


# ---------------------------------------------------------------------------
# Fit strategies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FixAlpha:
    """Hold the kinetic inductance fraction, fit (F tan(delta), Delta0)."""
    alpha: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and 0.0 <= self.alpha <= 1.0):
            raise DomainError(f"alpha must be in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class FixDelta:
    """Hold the gap, fit (F tan(delta), alpha)."""
    delta_0: float

    def __post_init__(self):
        if not (math.isfinite(self.delta_0) and self.delta_0 > 0.0):
            raise DomainError(f"delta_0 must be > 0, got {self.delta_0}")


@dataclass(frozen=True)
class FixDeltaSweep:
    """Run FixDelta for each listed gap; the spread of the best-fit values
    across the sweep becomes the reported uncertainty."""
    delta_values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.delta_values)
        if len(vals) < 2:
            raise DomainError("delta sweep needs at least two values")
        if any(not (math.isfinite(v) and v > 0.0) for v in vals):
            raise DomainError("all swept gaps must be positive")
        object.__setattr__(self, "delta_values", vals)


FitStrategy = FixAlpha | FixDelta | FixDeltaSweep


def _check_series(series: TemperatureSeries):
    if len(series) < MIN_FIT_POINTS:
        raise DomainError(
            f"need at least {MIN_FIT_POINTS} points to fit, got {len(series)}")
    if float(np.ptp(series.frequencies)) == 0.0:
        raise NoSignalError("temperature series has zero frequency variance")


def _tls_unit(series: TemperatureSeries) -> np.ndarray:
    return tls_shift(series.f0, series.temperatures, 1.0)


def _qp_unit(series: TemperatureSeries, delta_0: float) -> np.ndarray:
    return qp_shift(series.temperatures, 1.0, delta_0)


def _initial_guess(series: TemperatureSeries,
                   strategy: FitStrategy) -> TempModelParams:
    """Robust starting point: the shift is linear in F tan(delta) and alpha,
    so only Delta0 ever needs a scan."""
    y = series.relative_shift
    tls = _tls_unit(series)
    if isinstance(strategy, FixAlpha):
        best = None
        for delta in np.geomspace(5e-24, 2e-22, 40):  # ~30 ueV .. 1.2 meV
            qp = strategy.alpha * _qp_unit(series, delta)
            num = float(tls @ (y - qp))
            den = float(tls @ tls)
            ftd = max(num / den, 0.0) if den > 0 else 0.0
            cost = float(np.sum((y - ftd * tls - qp) ** 2))
            if best is None or cost < best[0]:
                best = (cost, ftd, delta)
        _, ftd, delta = best
        return TempModelParams(f_tan_delta=ftd, delta_0=delta,
                               alpha=strategy.alpha, f0=series.f0,
                               fixed=("alpha",))
    delta = strategy.delta_0 if isinstance(strategy, FixDelta) \
        else strategy.delta_values[len(strategy.delta_values) // 2]
    qp = _qp_unit(series, delta)
    design = np.column_stack([tls, qp])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    ftd = max(float(coef[0]), 0.0)
    alpha = min(max(float(coef[1]), 0.0), 1.0)
    return TempModelParams(f_tan_delta=ftd, delta_0=delta, alpha=alpha,
                           f0=series.f0, fixed=("delta_0",))


def _fit_two_free(series: TemperatureSeries, free: tuple[str, str],
                  init: TempModelParams, weights=None) -> TempModelParams:
    """Weighted least squares over the two free fields of the model."""
    y = series.relative_shift
    t = series.temperatures
    fixed_vals = {name: getattr(init, name) for name in TEMP_MODEL_FIELDS
                  if name not in free}
    tls_unit = _tls_unit(series)  # independent of every fitted parameter

    def residual(p):
        # evaluated without dataclass validation so LM may probe slightly
        # out-of-range trial points
        vals = dict(fixed_vals)
        vals[free[0]] = p[0]
        vals[free[1]] = p[1]
        delta = max(abs(vals["delta_0"]), 1e-30)
        model = vals["f_tan_delta"] * tls_unit + \
            vals["alpha"] * qp_shift(t, 1.0, delta)
        return model - y

    p0 = np.array([getattr(init, free[0]), getattr(init, free[1])])
    scales = np.array([max(abs(p0[0]), 1e-6), max(abs(p0[1]),
                       1e-24 if free[1] == "delta_0" else 1e-3)])
    res = least_squares_lm(residual, p0, scales=scales, weights=weights)

    values = dict(fixed_vals)
    sigmas = {}
    for k, name in enumerate(free):
        values[name] = float(res.params[k])
        if res.covariance is not None and res.covariance[k, k] >= 0:
            sigmas[name] = float(math.sqrt(res.covariance[k, k]))
    values["delta_0"] = abs(values["delta_0"])

    # physical bounds: clamp an escaping parameter to its boundary and
    # refit the remaining free parameter with the clamp in place
    clamped = []
    if "alpha" in free and not 0.0 <= values["alpha"] <= 1.0:
        new = min(max(values["alpha"], 0.0), 1.0)
        warnings.warn(f"fitted alpha {values['alpha']:.4g} clamped to {new}",
                      ClampedParameterWarning)
        values["alpha"] = new
        clamped.append("alpha")
    if "f_tan_delta" in free and values["f_tan_delta"] < 0.0:
        warnings.warn(f"fitted F tan(delta) {values['f_tan_delta']:.4g} "
                      "clamped to 0", ClampedParameterWarning)
        values["f_tan_delta"] = 0.0
        clamped.append("f_tan_delta")
    if clamped:
        for name in clamped:
            sigmas.pop(name, None)
        remaining = [n for n in free if n not in clamped]
        if remaining:
            values = _refit_single(series, remaining[0], values, y, tls_unit,
                                   weights)

    fixed = tuple(n for n in TEMP_MODEL_FIELDS if n not in free)
    return TempModelParams(f_tan_delta=values["f_tan_delta"],
                           delta_0=values["delta_0"], alpha=values["alpha"],
                           f0=series.f0, fixed=fixed, uncertainties=sigmas)


def _refit_single(series, name, values, y, tls_unit, weights):
    """One-parameter refit after a clamp; the model is linear in
    f_tan_delta and alpha, only delta_0 needs an iterative solve."""
    t = series.temperatures
    w2 = np.ones_like(y) if weights is None else np.asarray(weights) ** 2
    values = dict(values)
    if name == "f_tan_delta":
        resid = y - values["alpha"] * qp_shift(t, 1.0, values["delta_0"])
        den = float(w2 @ (tls_unit * tls_unit))
        values["f_tan_delta"] = max(float(w2 @ (tls_unit * resid)) / den, 0.0) \
            if den > 0 else 0.0
    elif name == "alpha":
        qp = qp_shift(t, 1.0, values["delta_0"])
        resid = y - values["f_tan_delta"] * tls_unit
        den = float(w2 @ (qp * qp))
        raw = float(w2 @ (qp * resid)) / den if den > 0 else 0.0
        values["alpha"] = min(max(raw, 0.0), 1.0)
    elif name == "delta_0":
        def residual(p):
            delta = max(abs(p[0]), 1e-30)
            model = values["f_tan_delta"] * tls_unit + \
                values["alpha"] * qp_shift(t, 1.0, delta)
            return model - y
        res = least_squares_lm(residual, np.array([values["delta_0"]]),
                               scales=np.array([values["delta_0"]]),
                               weights=weights)
        values["delta_0"] = abs(float(res.params[0]))
    return values


def fit_temperature_sweep(series: TemperatureSeries, strategy: FitStrategy,
                          initial: TempModelParams | None = None,
                          weights=None) -> TempModelParams:
    """Fit the shift model to a temperature series under the given strategy.

    FixAlpha fits (F tan(delta), Delta0); FixDelta fits (F tan(delta),
    alpha); FixDeltaSweep runs FixDelta per listed gap and reports the
    half-range across the sweep as the uncertainty of each parameter.
    """
    _check_series(series)
    if isinstance(strategy, FixDeltaSweep):
        members = [fit_temperature_sweep(series, FixDelta(d), initial, weights)
                   for d in strategy.delta_values]
        deltas = np.array(strategy.delta_values)
        ftds = np.array([m.f_tan_delta for m in members])
        alphas = np.array([m.alpha for m in members])
        spread = {
            "f_tan_delta": float(np.ptp(ftds)) / 2.0,
            "alpha": float(np.ptp(alphas)) / 2.0,
            "delta_0": float(np.ptp(deltas)) / 2.0,
        }
        mid = TempModelParams(
            f_tan_delta=float(ftds.mean()), delta_0=float(deltas.mean()),
            alpha=float(alphas.mean()), f0=series.f0, fixed=("delta_0",),
            uncertainties=spread)
        return mid

    if initial is None:
        initial = _initial_guess(series, strategy)
    if isinstance(strategy, FixAlpha):
        initial = initial.replace(alpha=strategy.alpha)
        return _fit_two_free(series, ("f_tan_delta", "delta_0"), initial,
                             weights)
    if isinstance(strategy, FixDelta):
        initial = initial.replace(delta_0=strategy.delta_0)
        return _fit_two_free(series, ("f_tan_delta", "alpha"), initial,
                             weights)
    raise DomainError(f"unknown fit strategy: {strategy!r}")


@dataclass(frozen=True)
class EnsembleFit:
    """Per-resonator fits plus their mean and empirical scatter."""

    per_resonator: tuple
    mean: TempModelParams
    spread: dict = field(default_factory=dict)


def ensemble_statistics(fits) -> EnsembleFit:
    """Mean and empirical (n-1) standard deviation over an ensemble of fits
    that share the same fixed parameters."""
    fits = list(fits)
    if len(fits) < 2:
        raise DomainError(f"need at least 2 fits, got {len(fits)}")
    fixed = fits[0].fixed
    if any(f.fixed != fixed for f in fits):
        raise InconsistentEnsembleError(
            "ensemble members were fitted with different fixed parameters")
    values = {name: np.array([getattr(f, name) for f in fits])
              for name in TEMP_MODEL_FIELDS}
    # free fields: empirical scatter across resonators; fixed fields keep
    # the largest per-fit uncertainty (e.g. the spread of a gap sweep)
    spread = {}
    for name, vals in values.items():
        if name not in fixed:
            spread[name] = float(np.std(vals, ddof=1))
        else:
            spread[name] = max((f.uncertainties.get(name, 0.0) for f in fits),
                               default=0.0)
    mean = TempModelParams(
        f_tan_delta=float(values["f_tan_delta"].mean()),
        delta_0=float(values["delta_0"].mean()),
        alpha=float(values["alpha"].mean()),
        f0=float(np.mean([f.f0 for f in fits])),
        fixed=fixed, uncertainties=spread)
    return EnsembleFit(per_resonator=tuple(fits), mean=mean, spread=spread)
