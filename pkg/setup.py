# Builds the optional compiled reduction kernel.  A plain
# `pip install -e . --no-build-isolation` compiles it when Cython and a C
# compiler are available; otherwise the package falls back to the NumPy
# kernel selected at import time.
import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "remlab._kernels._reduce",
                ["src/remlab/_kernels/_reduce.pyx"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
