from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # build the pure-Python package only
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [Extension("bdmix._kernels", ["src/bdmix/_kernels.pyx"],
                   extra_compile_args=["-O3"], optional=True)],
        compiler_directives={"language_level": 3},
    )

setup(ext_modules=ext_modules)
