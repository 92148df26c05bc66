"""Build script for the optional compiled search kernels.

The package works without the extension: a pure-Python implementation of the
same kernels is selected at import time when the compiled module is missing.
Set RAGSTACK_SKIP_EXT=1 to skip compilation entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("RAGSTACK_SKIP_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "ragstack._kernels._hnsw_cy",
                    ["src/ragstack/_kernels/_hnsw_cy.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
