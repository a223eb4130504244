"""Build script: compiles the optional fast-kernel extension.

The package is fully functional without the extension (a numpy reference
implementation is selected at import time), so any build failure here is
deliberately non-fatal.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext = Extension(
        "fraclab._kernels._fast",
        ["src/fraclab/_kernels/_fast.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level=3)
except Exception:
    ext_modules = []

setup(ext_modules=ext_modules)
