"""Builds the optional compiled stepping kernel.

If Cython or a C compiler is unavailable the package still installs;
dragtrack falls back to the pure-Python kernel at import time.
"""

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    extensions = cythonize(
        [
            Extension(
                "dragtrack._kernel_c",
                ["src/dragtrack/_kernel_c.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
