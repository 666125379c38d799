"""Build script for the optional compiled kernel.

The package works without the extension (a pure-numpy fallback is selected
at import time); building it just makes NLP evaluations much faster.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from setuptools.extension import Extension
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "olgopt._kernels._fast",
                ["src/olgopt/_kernels/_fast.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
