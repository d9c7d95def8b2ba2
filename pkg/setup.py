import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("UAM_LANDING_NO_EXT", "") in ("", "0"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "uam_landing._kernels",
                    ["src/uam_landing/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    # no FMA contraction and no sin/cos -> sincos fusion: both change the
                    # last bit, and results must match the Python fallback exactly
                    extra_compile_args=["-O3", "-ffp-contract=off", "-fno-builtin"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
