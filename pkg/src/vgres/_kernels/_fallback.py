"""Pure Python / numpy implementations of the numerical kernels.

Used when the compiled extension (vgres._kernels._native) is unavailable.
Algorithms and operation order mirror the extension exactly; the seeded
noise stream is bit-for-bit identical, float kernels agree to rounding.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

BACKEND = "python"

# --------------------------------------------------------------------------
# Complex digamma
#
# Recurrence psi(z) = psi(z+1) - 1/z walks |z| above ASYMPTOTIC_RADIUS, then
# the Stirling-type series in 1/z^2 applies; the reflection formula
# psi(1-z) - psi(z) = pi*cot(pi*z) covers Re(z) < 1/2 so the far negative
# half-plane never needs a long recurrence walk.
# --------------------------------------------------------------------------

_ASYMPTOTIC_RADIUS = 10.0

# B_{2n}/(2n) for the asymptotic series, n = 1..8
_PSI_COEFFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
)


def _cot_pi(z: complex) -> complex:
    """cot(pi*z), stable for large |Im(z)| (no overflow)."""
    if z.imag < 0.0:
        return _cot_pi(z.conjugate()).conjugate()
    # period-1 reduction keeps pi*z accurate for large |Re(z)|
    z = complex(z.real - math.floor(z.real + 0.5), z.imag)
    w = complex(math.pi * z.real, math.pi * z.imag)
    if w.imag == 0.0:
        return complex(math.cos(w.real) / math.sin(w.real), 0.0)
    q = cmath.exp(2j * w)  # |q| = exp(-2 Im w) <= 1
    return 1j * (q + 1.0) / (q - 1.0)


def _digamma_right(z: complex) -> complex:
    """psi(z) for Re(z) >= 0.5 via recurrence plus asymptotic series."""
    acc = complex(0.0, 0.0)
    while abs(z) < _ASYMPTOTIC_RADIUS:
        acc += 1.0 / z
        z += 1.0
    zi = 1.0 / z
    zi2 = zi * zi
    s = _PSI_COEFFS[7]
    for c in (_PSI_COEFFS[6], _PSI_COEFFS[5], _PSI_COEFFS[4], _PSI_COEFFS[3],
              _PSI_COEFFS[2], _PSI_COEFFS[1], _PSI_COEFFS[0]):
        s = c + zi2 * s
    return cmath.log(z) - 0.5 * zi - zi2 * s - acc


def _digamma_scalar(z: complex) -> complex:
    if z.real < 0.5:
        return _digamma_right(1.0 - z) - math.pi * _cot_pi(z)
    return _digamma_right(z)


def digamma(z):
    """Complex digamma of a scalar or array. Poles must be pre-filtered."""
    arr = np.asarray(z, dtype=np.complex128)
    if arr.ndim == 0:
        return _digamma_scalar(complex(arr))
    out = np.empty(arr.shape, dtype=np.complex128)
    flat_in = arr.ravel()
    flat_out = out.ravel()
    for i in range(flat_in.size):
        flat_out[i] = _digamma_scalar(complex(flat_in[i]))
    return out


# --------------------------------------------------------------------------
# Notch transmission model
# --------------------------------------------------------------------------

def notch_s21(freqs, a, theta, tau, q_l, q_c_mag, phi, f_r):
    """S21(f) = a e^{i theta} e^{-2 pi i f tau} [1 - (Q_l/|Q_c|) e^{i phi} / (1 + 2i Q_l (f/f_r - 1))]."""
    f = np.asarray(freqs, dtype=np.float64)
    x = f / f_r - 1.0
    depth = (q_l / q_c_mag) * complex(math.cos(phi), math.sin(phi))
    resonance = 1.0 - depth / (1.0 + 2j * q_l * x)
    bg_phase = theta - 2.0 * math.pi * tau * f
    background = a * (np.cos(bg_phase) + 1j * np.sin(bg_phase))
    return background * resonance


# --------------------------------------------------------------------------
# Seeded Gaussian stream: xorshift64* uniforms + Marsaglia polar method.
# Must stay bit-identical to the compiled version; do not reorder the
# floating point operations.
# --------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1
_XS_MULT = 2685821657736338717
_SEED_FOR_ZERO = 0x9E3779B97F4A7C15
_U64_TO_UNIT = 2.0 ** -53


def normal_stream(n: int, seed: int) -> np.ndarray:
    """n standard normal deviates from the given 64-bit seed."""
    if n < 0:
        raise ValueError("n must be >= 0")
    state = int(seed) & _MASK64
    if state == 0:
        state = _SEED_FOR_ZERO
    out = np.empty(n, dtype=np.float64)
    have_spare = False
    spare = 0.0
    i = 0
    while i < n:
        if have_spare:
            out[i] = spare
            i += 1
            have_spare = False
            continue
        while True:
            state ^= (state >> 12)
            state = (state ^ (state << 25)) & _MASK64
            state ^= (state >> 27)
            u1 = (((state * _XS_MULT) & _MASK64) >> 11) * _U64_TO_UNIT
            state ^= (state >> 12)
            state = (state ^ (state << 25)) & _MASK64
            state ^= (state >> 27)
            u2 = (((state * _XS_MULT) & _MASK64) >> 11) * _U64_TO_UNIT
            v1 = 2.0 * u1 - 1.0
            v2 = 2.0 * u2 - 1.0
            s = v1 * v1 + v2 * v2
            if 0.0 < s < 1.0:
                break
        factor = math.sqrt(-2.0 * math.log(s) / s)
        out[i] = v1 * factor
        i += 1
        spare = v2 * factor
        have_spare = True
    return out
