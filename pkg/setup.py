"""Build script: compiles the RK4 reference kernel extension when possible.

The extension is optional. If no C compiler (or Cython) is available the
install still succeeds and the package falls back to the pure-Python
kernels at import time.
"""
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Skip extension compilation instead of failing the whole install."""

    def run(self):
        try:
            super().run()
        except Exception as exc:
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"warning: building the compiled kernels failed ({exc!r}); "
            "installing with the pure-Python fallback",
            file=sys.stderr,
        )


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(
        [
            Extension(
                "scire._ckernels",
                ["src/scire/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
