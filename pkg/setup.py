"""Build script for the compiled kernel extension.

Metadata lives in ``pyproject.toml``; this file only declares the Cython
extension. When Cython or a compiler is unavailable the package still
installs and falls back to the pure-Python kernels at import time.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("CYLAB_NO_EXTENSION") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "cylab.kernels._ckernels",
                    ["src/cylab/kernels/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
