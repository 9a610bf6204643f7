"""Build script for the optional compiled geometry kernels.

The package works without the extension (chartkit.geometry falls back to the
numpy implementation at import time), so a failed cythonization only costs
speed, not functionality.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("chartkit._kernels", ["src/chartkit/_kernels.pyx"])],
        language_level="3",
    )
except ImportError:
    import warnings

    warnings.warn("Cython unavailable; installing chartkit without compiled kernels")

setup(ext_modules=ext_modules)
