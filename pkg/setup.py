"""Build script: compiles the optional extension core.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile only disables the fast lane.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "parabranch._core",
                ["src/parabranch/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    sys.stderr.write(f"parabranch: extension build skipped ({exc}); "
                     "pure-python lane will be used\n")

setup(ext_modules=ext_modules)
