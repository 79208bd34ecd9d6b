from setuptools import Extension, setup

# The compiled kernels are optional: without Cython or a C compiler the
# package installs and runs on the numpy fallback.
try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("foliamod._kernels", ["src/foliamod/_kernels.pyx"],
                   include_dirs=[np.get_include()], extra_compile_args=["-O3"],
                   optional=True)],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
