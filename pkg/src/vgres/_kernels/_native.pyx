# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels: complex digamma, notch transmission model,
and the seeded Gaussian stream.

Semantics mirror vgres._kernels._fallback; the noise stream is bit-for-bit
identical, float kernels agree to rounding.
"""

import numpy as np

from libc.math cimport M_PI, cos, floor, log, sin, sqrt
from libc.stdint cimport uint64_t

cdef extern from "complex.h" nogil:
    double complex clog(double complex)
    double complex cexp(double complex)
    double cabs(double complex)
    double complex conj(double complex)

BACKEND = "native"

cdef double _ASYMPTOTIC_RADIUS = 10.0

# B_{2n}/(2n) for the asymptotic series, n = 1..8
cdef double[8] _PSI_COEFFS
_PSI_COEFFS[0] = 1.0 / 12.0
_PSI_COEFFS[1] = -1.0 / 120.0
_PSI_COEFFS[2] = 1.0 / 252.0
_PSI_COEFFS[3] = -1.0 / 240.0
_PSI_COEFFS[4] = 1.0 / 132.0
_PSI_COEFFS[5] = -691.0 / 32760.0
_PSI_COEFFS[6] = 1.0 / 12.0
_PSI_COEFFS[7] = -3617.0 / 8160.0


cdef double complex _cot_pi(double complex z) noexcept nogil:
    cdef double complex w, q
    if z.imag < 0.0:
        return conj(_cot_pi(conj(z)))
    # period-1 reduction keeps pi*z accurate for large |Re(z)|
    z = (z.real - floor(z.real + 0.5)) + 1j * z.imag
    w = M_PI * z
    if w.imag == 0.0:
        return cos(w.real) / sin(w.real) + 0.0j
    q = cexp(2j * w)  # |q| = exp(-2 Im w) <= 1
    return 1j * (q + 1.0) / (q - 1.0)


cdef double complex _digamma_right(double complex z) noexcept nogil:
    cdef double complex acc = 0.0
    cdef double complex zi, zi2, s
    cdef int k
    while cabs(z) < _ASYMPTOTIC_RADIUS:
        acc = acc + 1.0 / z
        z = z + 1.0
    zi = 1.0 / z
    zi2 = zi * zi
    s = _PSI_COEFFS[7]
    for k in range(6, -1, -1):
        s = _PSI_COEFFS[k] + zi2 * s
    return clog(z) - 0.5 * zi - zi2 * s - acc


cdef double complex _digamma_scalar(double complex z) noexcept nogil:
    if z.real < 0.5:
        return _digamma_right(1.0 - z) - M_PI * _cot_pi(z)
    return _digamma_right(z)


def digamma(z):
    """Complex digamma of a scalar or array. Poles must be pre-filtered."""
    arr = np.asarray(z, dtype=np.complex128)
    if arr.ndim == 0:
        return _digamma_scalar(complex(arr))
    out = np.empty(arr.shape, dtype=np.complex128)
    cdef const double complex[::1] src = arr.ravel()
    cdef double complex[::1] dst = out.ravel()
    cdef Py_ssize_t i, n = src.shape[0]
    with nogil:
        for i in range(n):
            dst[i] = _digamma_scalar(src[i])
    return out


def notch_s21(freqs, double a, double theta, double tau, double q_l,
              double q_c_mag, double phi, double f_r):
    """S21(f) = a e^{i theta} e^{-2 pi i f tau} [1 - (Q_l/|Q_c|) e^{i phi} / (1 + 2i Q_l (f/f_r - 1))]."""
    f_arr = np.ascontiguousarray(freqs, dtype=np.float64)
    out = np.empty(f_arr.shape, dtype=np.complex128)
    cdef const double[::1] f = f_arr.ravel()
    cdef double complex[::1] dst = out.ravel()
    cdef Py_ssize_t i, n = f.shape[0]
    cdef double x, bg_phase
    cdef double complex depth, resonance, background
    depth = (q_l / q_c_mag) * (cos(phi) + 1j * sin(phi))
    with nogil:
        for i in range(n):
            x = f[i] / f_r - 1.0
            resonance = 1.0 - depth / (1.0 + 2j * (q_l * x))
            bg_phase = theta - 2.0 * M_PI * tau * f[i]
            background = a * (cos(bg_phase) + 1j * sin(bg_phase))
            dst[i] = background * resonance
    return out


cdef uint64_t _XS_MULT = 2685821657736338717ULL
cdef uint64_t _SEED_FOR_ZERO = 0x9E3779B97F4A7C15ULL
cdef double _U64_TO_UNIT = 2.0 ** -53


cdef inline double _next_unit(uint64_t* state) noexcept nogil:
    state[0] ^= state[0] >> 12
    state[0] ^= state[0] << 25
    state[0] ^= state[0] >> 27
    return <double> ((state[0] * _XS_MULT) >> 11) * _U64_TO_UNIT


def normal_stream(Py_ssize_t n, seed):
    """n standard normal deviates from the given 64-bit seed
    (xorshift64* uniforms, Marsaglia polar transform)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    cdef uint64_t state = <uint64_t> (int(seed) & ((1 << 64) - 1))
    if state == 0:
        state = _SEED_FOR_ZERO
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] dst = out
    cdef Py_ssize_t i = 0
    cdef bint have_spare = False
    cdef double spare = 0.0
    cdef double u1, u2, v1, v2, s, factor
    with nogil:
        while i < n:
            if have_spare:
                dst[i] = spare
                i += 1
                have_spare = False
                continue
            while True:
                u1 = _next_unit(&state)
                u2 = _next_unit(&state)
                v1 = 2.0 * u1 - 1.0
                v2 = 2.0 * u2 - 1.0
                s = v1 * v1 + v2 * v2
                if 0.0 < s < 1.0:
                    break
            factor = sqrt(-2.0 * log(s) / s)
            dst[i] = v1 * factor
            i += 1
            spare = v2 * factor
            have_spare = True
    return out
