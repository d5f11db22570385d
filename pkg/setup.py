import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "qwlab._step_kernel",
                ["src/qwlab/_step_kernel.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # -fcx-limited-range keeps complex multiplies inline instead
                # of __muldc3 calls; walk amplitudes are always finite.
                extra_compile_args=["-O3", "-fcx-limited-range"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-python fallback kernel is selected at import time, so a build
    # without Cython still yields a working package.
    ext_modules = []

setup(ext_modules=ext_modules)
