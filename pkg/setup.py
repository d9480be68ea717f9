"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure NumPy/Python fallback is
selected at import time), so a failed native build only costs speed.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:
    np = None
    cythonize = None


class optional_build_ext(build_ext):
    """Let installation proceed when the extension cannot be compiled."""

    def run(self):
        try:
            super().run()
        except Exception as exc:
            self._skip(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._skip(exc)

    @staticmethod
    def _skip(exc):
        print(
            "WARNING: building the turbrestore native kernels failed "
            f"({exc!r}); installing with the pure-Python fallback backend.",
            file=sys.stderr,
        )


if cythonize is not None and np is not None:
    extensions = cythonize(
        [
            Extension(
                "turbrestore._kernels._native",
                ["src/turbrestore/_kernels/_native.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
else:
    extensions = []

setup(ext_modules=extensions, cmdclass={"build_ext": optional_build_ext})
