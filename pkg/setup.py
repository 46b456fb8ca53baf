import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("DENGUE_SEIR_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "dengue_seir._kernels",
                    ["src/dengue_seir/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    # fp contraction would break parity with the Python fallback
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
