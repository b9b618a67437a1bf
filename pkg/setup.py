"""Builds the optional compiled kernels.

Without Cython (or with PJP_NO_EXT=1) the package installs pure Python and
``pjp.kernels`` falls back to ``pjp._kernels_py``.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("PJP_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension("pjp._kernels", ["src/pjp/_kernels.pyx"], extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
