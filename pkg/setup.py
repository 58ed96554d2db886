"""Builds the optional Cython kernels; the package works without them."""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension
except ImportError:
    pass
else:
    ext_modules = cythonize(
        [
            Extension(
                "semsteg.numerics._im2col",
                ["src/semsteg/numerics/_im2col.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
