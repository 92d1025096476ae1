import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("WICKGEN_NO_EXT", "") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "wickgen._ckernels",
                    ["src/wickgen/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        # no Cython or numpy at build time: install the pure-Python fallback only
        ext_modules = []

setup(ext_modules=ext_modules)
