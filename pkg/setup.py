"""Build script.

The compiled kernel (adaptrec._core) is optional: if Cython or a C
compiler is unavailable the package installs anyway and falls back to
the pure-Python backend at import time.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("ADAPTREC_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext = Extension(
            "adaptrec._core",
            ["src/adaptrec/_core.pyx"],
            extra_compile_args=["-O3"],
        )
        ext.optional = True
        ext_modules = cythonize([ext], compiler_directives={"language_level": "3"})
    except ImportError:
        pass

setup(ext_modules=ext_modules)
