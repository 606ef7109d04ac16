"""Build script for the optional Cython kernel.

The package works without the extension (a NumPy fallback is selected at
import time), but the compiled kernel makes the large Monte Carlo
verification runs several times faster.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "descbound._kernels._mc",
                ["src/descbound/_kernels/_mc.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=extensions)
