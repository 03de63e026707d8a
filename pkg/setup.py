"""Builds the optional compiled matrix kernels; the package works without them."""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("MONOPRUNE_NO_EXT", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("monoprune._ckernels", ["src/monoprune/_ckernels.pyx"])],
            compiler_directives={"language_level": 3, "boundscheck": False, "wraparound": False},
        )

setup(ext_modules=ext_modules)
