import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("MEMBRANE_LAB_PURE") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "membrane_lab._accel",
                    ["src/membrane_lab/_accel.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        # no Cython: the package falls back to the numpy kernels at import
        ext_modules = []

setup(ext_modules=ext_modules)
