"""Build hook for the optional compiled enumeration core.

The package is pure Python by default.  When Cython and a C compiler are
available, the hot DFS kernel in src/rashomon/_enumcore.pyx is compiled and
picked up automatically at import; otherwise the build silently degrades to
the pure-Python backend (same results, slower).
"""

import os
import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

HERE = os.path.dirname(os.path.abspath(__file__))
PYX = os.path.join("src", "rashomon", "_enumcore.pyx")
C_SRC = os.path.join("src", "rashomon", "_enumcore.c")


class OptionalBuildExt(build_ext):
    """Never fail the install because the fast core cannot be compiled."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, etc.
            warnings.warn(f"compiled core skipped ({exc}); using pure-Python backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"compiled core skipped ({exc}); using pure-Python backend")


def extensions():
    if os.path.exists(os.path.join(HERE, PYX)):
        try:
            from Cython.Build import cythonize

            return cythonize(
                [Extension("rashomon._enumcore", [PYX])],
                compiler_directives={"language_level": "3"},
            )
        except ImportError:
            pass
    if os.path.exists(os.path.join(HERE, C_SRC)):
        return [Extension("rashomon._enumcore", [C_SRC])]
    return []


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
