"""Build script.

The simulation kernels live in ``sdneuro/_kernels.pyx``.  When Cython is
available they are compiled to a C extension; otherwise the install falls
back to the pure-Python implementation in ``sdneuro/_kernels_py.py`` and
everything still works (just slower).  Set SDNEURO_PURE_PYTHON=1 to skip
the extension on purpose.

-ffp-contract=off keeps the compiled kernels bit-identical to the Python
fallback (no FMA contraction of a*y + c*x).
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("SDNEURO_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "sdneuro._kernels",
                    ["src/sdneuro/_kernels.pyx"],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
