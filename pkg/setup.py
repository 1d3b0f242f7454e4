import os

import numpy as np
from setuptools import Extension, setup

# Set SPARSESQRT_NO_EXT=1 to install without the compiled kernels.
ext_modules = []
if not os.environ.get("SPARSESQRT_NO_EXT"):
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "sparsesqrt._ckernels",
                ["src/sparsesqrt/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
