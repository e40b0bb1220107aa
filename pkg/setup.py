import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "fp_qsdc._core",
                ["src/fp_qsdc/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Without Cython the package still works through the pure-python kernels.
    extensions = []

setup(ext_modules=extensions)
