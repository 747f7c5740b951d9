import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("SECRECY_RELAY_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "secrecy_relay._ckernels",
                    ["src/secrecy_relay/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                    optional=True,
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
