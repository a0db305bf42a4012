import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

setup(
    ext_modules=cythonize(
        [Extension("bigraph_sum._kernels", ["src/bigraph_sum/_kernels.pyx"], include_dirs=[numpy.get_include()])],
        language_level=3,
    ),
)
