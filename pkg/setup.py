"""Build the optional compiled Givens kernel.

If Cython or a C compiler is unavailable the package installs without it and
falls back to the numpy implementation at import time.
"""
from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("mmqp._givens", ["src/mmqp/_givens.pyx"],
                   include_dirs=[np.get_include()], extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
