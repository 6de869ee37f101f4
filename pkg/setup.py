# Builds the optional compiled stencil kernels.  The package works without
# them (a pure-numpy fallback is selected at import), but the compiled core
# is noticeably faster on 3D grids; see benchmarks/bench_kernels.py.
#
# To rebuild in place:  python setup.py build_ext --inplace

import numpy as np
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
                "sharprem._kernels._stencil_cy",
                ["src/sharprem/_kernels/_stencil_cy.pyx"],
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

setup(ext_modules=extensions)
