"""Build script.

The package is pure Python plus one optional Cython extension holding the
O(n^2) coefficient kernels.  If Cython or a C compiler is unavailable the
extension is skipped and the numpy fallback in parman._kernels.reference is
used at import time, so the install never hard-fails on the compile step.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "parman._kernels._fast",
                ["src/parman/_kernels/_fast.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
