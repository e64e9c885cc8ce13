"""Build script: compiles the optional CTC forward kernel.

The package works without the extension (a numpy fallback is selected at
import time), so any compilation failure downgrades to a pure-Python build
instead of aborting the install.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "voxenc.ctc._forward_c",
                sources=["src/voxenc/ctc/_forward_c.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"voxenc: building without compiled CTC kernel ({exc})")

setup(ext_modules=ext_modules)
