from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("conicraster._kernel", ["src/conicraster/_kernel.pyx"])],
        language_level=3,
    )

setup(ext_modules=ext_modules)
