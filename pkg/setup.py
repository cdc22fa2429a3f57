"""Build the optional compiled core; the package falls back to pure Python
when the extension is unavailable."""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("BERNLOEWNER_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "bernloewner._core",
                    ["src/bernloewner/_core.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
