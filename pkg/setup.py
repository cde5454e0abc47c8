"""Build script: compiles the Cython kernel core when possible.

The package works without the extension (pure-Python kernels are selected at
import time), so a failed extension build degrades performance, not
functionality. Set PFLSIM_NO_EXT=1 to skip the extension entirely.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("PFLSIM_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "pflsim._core",
                    ["src/pflsim/_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except Exception as exc:  # pragma: no cover - build-environment dependent
        print(f"pflsim: skipping Cython core ({exc}); pure-Python kernels will be used")

setup(ext_modules=ext_modules)
