"""Build script for the compiled kernel extension.

The extension is optional at runtime: vgres._kernels falls back to a pure
numpy/Python implementation when the compiled module is missing.
"""

from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension(
        "vgres._kernels._native",
        sources=["src/vgres/_kernels/_native.pyx"],
        # -ffp-contract=off keeps the float semantics identical to the pure
        # Python fallback (no FMA contraction), so seeded noise streams are
        # bit-for-bit reproducible across both backends.
        extra_compile_args=["-O3", "-ffp-contract=off"],
    ),
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": "3",
        },
    ),
)
