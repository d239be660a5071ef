from setuptools import Extension, setup

# The compiled reduction kernel is optional: the package falls back to the
# pure-Python backend when the extension is missing.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("cochainopt._reduction", ["src/cochainopt/_reduction.pyx"])],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
