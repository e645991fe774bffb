import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("BIDCLUBS_NO_EXTENSION") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("bidclubs._bidkernel", ["src/bidclubs/_bidkernel.pyx"])],
            language_level=3,
        )
    except ImportError:
        # No Cython available: install the pure-python backend only.
        ext_modules = []

setup(ext_modules=ext_modules)
