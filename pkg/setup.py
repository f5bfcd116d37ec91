"""Build shim: compiles the optional Cython chain kernel.

Set LATFLIP_NO_EXT=1 to skip the extension entirely; the package then runs on
the pure-Python kernel (same results, slower).
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("LATFLIP_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/latflip/_chain_cy.pyx"],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
