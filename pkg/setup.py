"""Builds the optional Cython solver core.

The package is pure Python plus one accelerator module. When Cython or a C
compiler is unavailable the build falls through and the numpy fallback kernels
are used at import time instead.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "baitpress._ckernels",
                ["src/baitpress/_ckernels.pyx"],
                # -ffp-contract=off keeps the compiled passes bit-compatible
                # with IEEE double semantics (no fused multiply-add), so the
                # two backends stay numerically interchangeable.
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
