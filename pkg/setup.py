"""Build script: compiles the optional matcher speedup extension.

The package works without the extension (a pure-Python fallback is selected
at import time), so a failed compile only costs performance.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible; fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler or toolchain missing
            print(f"warning: speedup extension not built ({exc}); "
                  "pure-Python matcher will be used", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to compile {ext.name} ({exc})",
                  file=sys.stderr)


try:
    from Cython.Build import cythonize
    extensions = cythonize(
        [
            Extension(
                "reproaudit.matcher._speedups",
                ["src/reproaudit/matcher/_speedups.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(
    ext_modules=extensions,
    cmdclass={"build_ext": optional_build_ext},
)
