"""Build script: compiles the optional Cython kernel for truncated-series arithmetic.

The package works without the extension (a NumPy fallback is selected at
import time), so any failure to build it is non-fatal.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "ache_lab._kernels._series_cy",
                ["src/ache_lab/_kernels/_series_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"ache-lab: skipping Cython kernel build ({exc}); pure-Python fallback will be used")

setup(ext_modules=ext_modules)
