import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # numpy fallback is selected at import time
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("CHEAPNS_NO_EXT"):
    extensions = [
        Extension(
            "cheapns._kernels",
            ["src/cheapns/_kernels.pyx"],
            include_dirs=[np.get_include()],
            extra_compile_args=["-O3", "-fopenmp"],
            extra_link_args=["-fopenmp"],
        )
    ]
    ext_modules = cythonize(extensions, compiler_directives={"language_level": "3"})

setup(ext_modules=ext_modules)
