"""Build script for the compiled search kernel.

The package works without the extension (a pure-Python kernel is selected
at import time), but the compiled kernel is what makes exhaustive search
on the larger desk-scale instances fast.
"""
from setuptools import setup, Extension

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("rainbowmg._search", ["src/rainbowmg/_search.pyx"])],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
