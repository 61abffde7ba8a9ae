"""Build hook: compile the optional fast kernels when Cython is available.

The extension is declared optional, so a missing compiler or a failed build
degrades to the pure-Python kernels instead of breaking the install.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext = Extension(
        "geoforge.kernels._fast",
        sources=["src/geoforge/kernels/_fast.pyx"],
        # contraction off: results must be bit-identical to the pure fallback
        extra_compile_args=["-O2", "-ffp-contract=off"],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level="3")
except ImportError:
    pass

setup(ext_modules=ext_modules)
