"""Notch (hanger) resonator extraction from complex transmission sweeps.

Pipeline implemented by :func:`fit_notch`:

1. background estimate (cable delay from edge phase slope, level from the
   off-resonant magnitude) and removal,
2. Taubin algebraic circle fit of the normalized trace,
3. phase-versus-frequency fit of the arctan form
   ``theta(f) = theta0 + 2 atan(2 Q_l (1 - f/f_r))`` for (f_r, Q_l),
4. coupling quality factor and mismatch angle from the circle diameter and
   center (diameter-corrected notch model),
5. joint least-squares refinement of all seven model parameters.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from . import _kernels
from .core import ComplexSweep, NotchFit
from .errors import (BackgroundMarginWarning, DegenerateGeometryError,
                     DomainError, FitConvergenceError, MultiResonanceWarning,
                     NoResonanceError, VgresError)
from .lm import least_squares_lm

Q_L_LIMIT = 1e9
# dip must additionally clear this fraction of the off-resonant level, so a
# noiseless flat trace never counts as a resonance
MIN_RELATIVE_DIP = 1e-6
EDGE_FRACTION = 0.1


@dataclass(frozen=True)
class Circle:
    """Circle in the complex plane, dimensionless units."""

    xc: float
    yc: float
    r: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.xc, self.yc, self.r)):
            raise DegenerateGeometryError("circle parameters not finite")
        if self.r <= 0:
            raise DegenerateGeometryError(f"radius must be positive, got {self.r}")

    @property
    def center(self) -> complex:
        return complex(self.xc, self.yc)


@dataclass(frozen=True)
class NotchParams:
    """Forward-model parameters:
    S21(f) = a e^{i theta} e^{-2 pi i f tau} [1 - (Q_l/|Q_c|) e^{i phi} / (1 + 2i Q_l (f/f_r - 1))]."""

    a: float = 1.0
    theta: float = 0.0
    tau: float = 0.0
    q_l: float = 1000.0
    q_c_mag: float = 2000.0
    phi: float = 0.0
    f_r: float = 5e9

    def evaluate(self, freqs) -> np.ndarray:
        return _kernels.notch_s21(np.asarray(freqs, dtype=float), self.a,
                                  self.theta, self.tau, self.q_l,
                                  self.q_c_mag, self.phi, self.f_r)


def fit_circle(points) -> Circle:
    """Algebraic best-fit circle through complex points (Taubin fit).

    Exact for points lying exactly on a circle; gradient weighting keeps the
    estimate nearly unbiased at moderate noise.  Raises
    DegenerateGeometryError for < 3 points or collinear input.
    """
    z = np.asarray(points, dtype=np.complex128).ravel()
    if z.size < 3:
        raise DegenerateGeometryError(f"need at least 3 points, got {z.size}")
    if not np.all(np.isfinite(z)):
        raise DegenerateGeometryError("points contain non-finite values")
    x = z.real
    y = z.imag
    xm = x.mean()
    ym = y.mean()
    u = x - xm
    v = y - ym
    q = u * u + v * v
    qm = q.mean()
    scale = math.sqrt(qm) if qm > 0 else 0.0
    if scale == 0.0:
        raise DegenerateGeometryError("all points coincide")
    # Taubin constraint via SVD of [ (q - <q>)/(2 sqrt<q>), u, v ]
    mat = np.column_stack(((q - qm) / (2.0 * scale), u, v))
    _, sing, vt = np.linalg.svd(mat, full_matrices=False)
    a0, b0, c0 = vt[-1]
    a_coef = a0 / (2.0 * scale)
    d_coef = -qm * a_coef
    # collinear data drives the quadratic coefficient to zero and the
    # radius to infinity relative to the data spread
    if a_coef == 0.0:
        raise DegenerateGeometryError("points are collinear")
    xc = -b0 / (2.0 * a_coef)
    yc = -c0 / (2.0 * a_coef)
    r_sq = (b0 * b0 + c0 * c0 - 4.0 * a_coef * d_coef) / (4.0 * a_coef * a_coef)
    if not (math.isfinite(xc) and math.isfinite(yc) and r_sq > 0):
        raise DegenerateGeometryError("points are collinear")
    r = math.sqrt(r_sq)
    if r > 1e8 * scale:
        raise DegenerateGeometryError("points are collinear (radius diverges)")
    return Circle(xc=xc + xm, yc=yc + ym, r=r)


def internal_q(q_l: float, q_c_mag: float, phi: float):
    """Diameter-corrected internal quality factor.

    1/Q_int = 1/Q_l - cos(phi)/|Q_c|.  Returns None when the right-hand
    side is <= 0 (data outside the notch model) instead of a negative Q.
    """
    if not (math.isfinite(q_l) and q_l > 0):
        raise DomainError(f"q_l must be positive, got {q_l}")
    if not (math.isfinite(q_c_mag) and q_c_mag > 0):
        raise DomainError(f"q_c_mag must be positive, got {q_c_mag}")
    inv = 1.0 / q_l - math.cos(phi) / q_c_mag
    if inv <= 0.0:
        return None
    return 1.0 / inv


def _edge_indices(n: int) -> np.ndarray:
    k = max(2, int(round(n * EDGE_FRACTION)))
    return np.concatenate([np.arange(k), np.arange(n - k, n)])


def _dip_width_fraction(sweep: ComplexSweep) -> float:
    """Fraction of the span where |S21| is below the half-depth level.

    Returns 0 when there is no significant dip at all, so rounding-level
    magnitude scatter on a flat trace does not read as a span-filling
    resonance."""
    mag = np.abs(sweep.s21)
    median = float(np.median(mag))
    depth = median - float(mag.min())
    if depth <= MIN_RELATIVE_DIP * median:
        return 0.0
    below = mag < median - 0.5 * depth
    if not below.any():
        return 0.0
    f = sweep.frequencies
    return float((f[below].max() - f[below].min()) / (f[-1] - f[0]))


def _regress_background(f, s21, idx):
    """(a, theta, tau) from a phase-slope regression over the given points."""
    phase = np.unwrap(np.angle(s21))
    f_mid = f.mean()
    slope, intercept = np.polyfit(f[idx] - f_mid, phase[idx], 1)
    tau = -slope / (2.0 * math.pi)
    theta = math.remainder(intercept + 2.0 * math.pi * tau * f_mid, 2.0 * math.pi)
    a = float(np.median(np.abs(s21[idx])))
    if a <= 0:
        raise DomainError("off-resonant level is zero; cannot normalize")
    return a, theta, tau


def estimate_background(sweep: ComplexSweep):
    """Estimate background (a, theta, tau) of a sweep.

    First pass: cable delay tau from the phase slope over the off-resonant
    edge windows, amplitude and phase offset from the off-resonant level.
    When a resonance is present, the phase offset inherits the full
    tau * f_mid sensitivity of the slope, so a second pass divides out a
    provisional resonance model and regresses the background over all
    points.  Dividing the sweep by a e^{i(theta - 2 pi f tau)} brings the
    off-resonant transmission to 1 + 0i.  When the resonance fills the
    span, a BackgroundMarginWarning is emitted and the first-pass slope is
    regressed over all points instead.
    """
    f = sweep.frequencies

    if _dip_width_fraction(sweep) > 0.5:
        warnings.warn("resonance occupies most of the span; background "
                      "estimated from a global phase-slope regression",
                      BackgroundMarginWarning)
        idx = np.arange(len(sweep))
    else:
        idx = _edge_indices(len(sweep))
    a, theta, tau = _regress_background(f, sweep.s21, idx)

    # Iterate: remove the provisional resonance so the regression sees
    # background only, then re-derive the resonance from the improved
    # background.  Each round shrinks the delay error by roughly an order
    # of magnitude; the exact background is a fixed point.  Sweeps without
    # anything circle-like (pure background) keep the first-pass result.
    f_r0 = float(f[np.argmin(np.abs(sweep.s21))])
    all_idx = np.arange(len(sweep))
    tau_scale = 1.0 / (2.0 * math.pi * (f[-1] - f[0]))
    try:
        for _ in range(8):
            z = sweep.s21 / (a * np.exp(1j * (theta - 2.0 * math.pi * tau * f)))
            circle = fit_circle(z)
            theta_c, q_l, f_r = fit_phase(f, z - circle.center, f_r0)
            offres = circle.center + circle.r * cmath.exp(1j * (theta_c - math.pi))
            center = circle.center / offres
            radius = circle.r / abs(offres)
            q_c_mag = q_l / (2.0 * radius)
            phi = cmath.phase(1.0 - center)
            resonance = 1.0 - (q_l / q_c_mag) * cmath.exp(1j * phi) / \
                (1.0 + 2j * q_l * (f / f_r - 1.0))
            a, theta, tau_new = _regress_background(
                f, sweep.s21 / resonance, all_idx)
            done = abs(tau_new - tau) < 1e-9 * max(abs(tau_new), tau_scale)
            tau = tau_new
            if done:
                break
    except (VgresError, np.linalg.LinAlgError):
        pass
    return a, theta, tau


def remove_background(sweep: ComplexSweep, a: float, theta: float,
                      tau: float) -> np.ndarray:
    """Divide out a e^{i theta} e^{-2 pi i f tau}; off-resonant level -> 1."""
    f = sweep.frequencies
    bg = a * np.exp(1j * (theta - 2.0 * math.pi * tau * f))
    return sweep.s21 / bg


def _detect_dip(sweep: ComplexSweep):
    """Index of the resonance dip; raises NoResonanceError if absent."""
    mag = np.abs(sweep.s21)
    idx = _edge_indices(len(sweep))
    # robust noise floor from the off-resonant edges, detrended linearly
    coef = np.polyfit(sweep.frequencies[idx], mag[idx], 1)
    resid = mag[idx] - np.polyval(coef, sweep.frequencies[idx])
    noise = 1.4826 * float(np.median(np.abs(resid - np.median(resid))))
    median = float(np.median(mag))
    depth = median - float(mag.min())
    if depth < max(3.0 * noise, MIN_RELATIVE_DIP * median):
        raise NoResonanceError(
            f"no dip found: depth {depth:.3g} vs noise floor {noise:.3g}")
    # a secondary resonance must stand clear of both the noise and the main
    # dip; plain noise wiggles never qualify
    threshold = max(6.0 * noise, 0.2 * depth)
    peaks, _ = find_peaks(-mag, prominence=threshold)
    if len(peaks) > 1:
        warnings.warn(f"{len(peaks)} dips in span; fitting the deepest",
                      MultiResonanceWarning)
    if len(peaks) == 0:
        return int(np.argmin(mag))
    return int(peaks[np.argmin(mag[peaks])])


def _initial_phase_params(f, centered_phase, f_r0):
    """Starting values for the arctan phase fit."""
    # loaded Q from the frequency distance over which the phase swings by
    # half its total excursion around the resonance
    total = centered_phase.max() - centered_phase.min()
    if total <= 0:
        return None
    mid = 0.5 * (centered_phase[0] + centered_phase[-1])
    above = centered_phase > mid
    cross = np.where(np.diff(above.astype(int)) != 0)[0]
    width = None
    if len(cross) >= 1:
        lo = max(cross[0] - 1, 0)
        hi = min(cross[-1] + 1, len(f) - 1)
        width = f[hi] - f[lo]
    if not width or width <= 0:
        width = (f[-1] - f[0]) / 10.0
    return max(f_r0 / width, 10.0)


def fit_phase(f, z_centered, f_r0, q_l0=None):
    """Fit theta(f) = theta0 + 2 atan(2 Q_l (1 - f/f_r)) to the phase of the
    circle-centered trace. Returns (theta0, q_l, f_r)."""
    phase = np.unwrap(np.angle(z_centered))
    if q_l0 is None:
        q_l0 = _initial_phase_params(f, phase, f_r0) or f_r0 / (f[-1] - f[0])
    theta0_0 = float(phase[np.argmin(np.abs(f - f_r0))])

    def residual(p):
        theta0, q_l, f_r = p
        model = theta0 + 2.0 * np.arctan(2.0 * q_l * (1.0 - f / f_r))
        return phase - model

    scales = np.array([1.0, abs(q_l0), f_r0])
    res = least_squares_lm(residual, np.array([theta0_0, q_l0, f_r0]),
                           scales=scales)
    theta0, q_l, f_r = res.params
    return float(theta0), float(abs(q_l)), float(f_r)


def _full_model(f, p):
    a, theta, tau, q_l, q_c_mag, phi, f_r = p
    return _kernels.notch_s21(f, a, theta, tau, q_l, q_c_mag, phi, f_r)


def fit_notch(sweep: ComplexSweep, weights=None) -> NotchFit:
    """Extract resonance and background parameters from a notch sweep.

    Parameters
    ----------
    sweep : ComplexSweep spanning one resonance with off-resonant margin.
    weights : optional per-point 1/sigma array for the final refinement
        (uniform when omitted).

    Raises
    ------
    NoResonanceError   when no dip rises above the noise floor.
    FitConvergenceError when the refinement diverges (non-finite parameters
        or Q_l beyond 1e9); carries the best intermediate state.
    """
    _detect_dip(sweep)
    a0, theta0, tau0 = estimate_background(sweep)
    z = remove_background(sweep, a0, theta0, tau0)
    f = sweep.frequencies

    circle = fit_circle(z)
    f_r0 = float(f[np.argmin(np.abs(sweep.s21))])
    theta_c, q_l0, f_r1 = fit_phase(f, z - circle.center, f_r0)

    # off-resonant point sits diametrically opposite the resonance point
    offres = circle.center + circle.r * cmath.exp(1j * (theta_c - math.pi))
    # fold any residual off-resonant deviation into the background estimate
    a0 *= abs(offres)
    theta0 = math.remainder(theta0 + cmath.phase(offres), 2.0 * math.pi)
    center = circle.center / offres
    radius = circle.r / abs(offres)

    q_c0 = q_l0 / (2.0 * radius)
    phi0 = cmath.phase(1.0 - center)

    span = f[-1] - f[0]
    p0 = np.array([a0, theta0, tau0, q_l0, q_c0, phi0, f_r1])
    scales = np.array([max(a0, 1e-3), 1.0, 1.0 / (2.0 * math.pi * span),
                       max(q_l0, 10.0), max(q_c0, 10.0), 1.0, f_r1])

    def residual(p):
        model = _full_model(f, p)
        d = sweep.s21 - model
        return np.concatenate([d.real, d.imag])

    w2 = None
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        if w.shape != f.shape or np.any(w <= 0):
            raise DomainError("weights must be positive, one per point")
        w2 = np.concatenate([w, w])

    try:
        res = least_squares_lm(residual, p0, scales=scales, weights=w2)
    except FitConvergenceError as err:
        raise FitConvergenceError(f"notch refinement failed: {err}",
                                  trace=err.trace,
                                  best_params=err.best_params) from err

    a, theta, tau, q_l, q_c_mag, phi, f_r = res.params
    # sign/branch cleanup: magnitudes positive, angles in principal ranges
    if a < 0:
        a, theta = -a, theta + math.pi
    q_l = abs(q_l)
    q_c_mag = abs(q_c_mag)
    theta = math.remainder(theta, 2.0 * math.pi)
    phi = math.remainder(phi, 2.0 * math.pi)

    if not np.all(np.isfinite(res.params)) or q_l > Q_L_LIMIT:
        raise FitConvergenceError(
            f"notch fit diverged (q_l={q_l:.3g})", trace=res.trace,
            best_params=res.params)
    if not (f[0] <= f_r <= f[-1]):
        raise FitConvergenceError(
            f"fitted resonance {f_r:.6g} Hz outside the sweep span",
            trace=res.trace, best_params=res.params)

    q_int = internal_q(q_l, q_c_mag, phi)
    if q_int is None:
        raise FitConvergenceError(
            "fit implies non-positive internal loss (out of model)",
            trace=res.trace, best_params=res.params)

    n = len(sweep)
    misfit = sweep.s21 - _full_model(f, res.params)
    residual_rms = math.sqrt(float(np.sum(np.abs(misfit) ** 2)) / n)
    return NotchFit(f_r=float(f_r), q_l=float(q_l), q_c_mag=float(q_c_mag),
                    phi=float(phi), q_int=float(q_int),
                    background_amp=float(a), background_phase=float(theta),
                    cable_delay=float(tau), residual_rms=float(residual_rms))
