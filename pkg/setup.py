"""Build script: compiles the optional Cython sweep kernel.

The package is fully functional without the extension (a pure-Python
kernel is selected at import time), so any build failure here degrades
to a pure-Python install instead of aborting.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "gridsim_ev.powerflow._sweep_cy",
                ["src/gridsim_ev/powerflow/_sweep_cy.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
