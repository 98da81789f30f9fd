"""Build script for the optional compiled kernel core.

The package is fully functional without the extension (a numpy fallback with
bit-identical outputs is selected at import time).  Set LATENTCUT_SKIP_EXT=1
to skip compilation, e.g. on platforms without a C toolchain.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("LATENTCUT_SKIP_EXT"):
    try:
        from Cython.Build import cythonize

        ext = Extension(
            "latentcut._kernels._core",
            sources=["src/latentcut/_kernels/_core.pyx"],
            # -ffp-contract=off: no fused multiply-add, the fallback and the
            # compiled path must round identically at every step.
            extra_compile_args=["-O3", "-ffp-contract=off"],
        )
        ext_modules = cythonize(
            [ext],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
