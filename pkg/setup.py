from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [Extension("cwchaos._lap", ["src/cwchaos/_lap.pyx"])],
        language_level=3,
    )
except ImportError:
    # Pure-Python fallback kernel is selected at import time; the compiled
    # extension is an optimization, not a requirement.
    extensions = []

setup(ext_modules=extensions)
