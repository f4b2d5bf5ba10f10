"""Numerical kernels with a compiled fast path.

The compiled extension (Cython, vgres._kernels._native) is preferred; a
pure numpy/Python fallback with identical semantics is selected when the
extension is not built.  Set VGRES_KERNELS=native or VGRES_KERNELS=python
to force a backend (native then raises if the extension is missing).

Kernels
-------
digamma(z)            complex digamma, scalar or array
notch_s21(f, ...)     notch-resonator forward model on a frequency grid
normal_stream(n, s)   seeded reproducible standard-normal stream
                      (xorshift64* uniforms + Marsaglia polar method)
"""

import os

_requested = os.environ.get("VGRES_KERNELS", "").strip().lower()

if _requested not in ("", "native", "python"):
    raise ImportError(
        f"VGRES_KERNELS must be 'native' or 'python', got {_requested!r}")

if _requested == "python":
    from . import _fallback as _impl
else:
    try:
        from . import _native as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _requested == "native":
            raise
        from . import _fallback as _impl

BACKEND = _impl.BACKEND
digamma = _impl.digamma
notch_s21 = _impl.notch_s21
normal_stream = _impl.normal_stream

__all__ = ["BACKEND", "digamma", "notch_s21", "normal_stream"]
