"""Build script for the optional compiled raster kernel.

The extension is a pure speedup: if Cython or a C compiler is missing the
install still succeeds and the package falls back to the numpy kernel at
import time (see annoforge.geometry.backend).
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "annoforge.geometry._kernels",
                sources=["src/annoforge/geometry/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # keep float ops un-contracted so compiled and numpy kernels
                # produce bit-identical masks
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
