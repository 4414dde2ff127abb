import os

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None and os.path.exists("src/slipns/_kernels/_stencils.pyx"):
    ext_modules = cythonize(
        [
            Extension(
                "slipns._kernels._stencils",
                ["src/slipns/_kernels/_stencils.pyx"],
                # -ffp-contract=off keeps results bitwise identical to the
                # numpy backend (no FMA contraction)
                extra_compile_args=["-O3", "-march=native", "-ffp-contract=off"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
