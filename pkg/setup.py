"""Build script: compiles the optional jet-convolution kernel.

The package is pure Python plus one optional Cython extension; when
Cython (or a C compiler) is unavailable the extension is skipped and the
numpy fallback is selected at import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "parakahler._jetkern",
                ["src/parakahler/_jetkern.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
