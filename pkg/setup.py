"""Build the optional compiled training kernel.

If Cython or a C compiler is unavailable the package installs without the
extension and runs on the NumPy kernel.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:
            print(f"warning: compiled kernel not built ({exc}); using the NumPy fallback", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: {ext.name} not built ({exc}); using the NumPy fallback", file=sys.stderr)


ext_modules = []
if cythonize is not None:
    import numpy

    ext_modules = cythonize(
        [
            Extension(
                "gwpscreen.nnet._mlp_kernel",
                ["src/gwpscreen/nnet/_mlp_kernel.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": 3},
    )

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
