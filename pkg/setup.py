import os

from setuptools import Extension, setup


def extensions():
    """Build the compiled kernel core unless explicitly disabled.

    Set FEATSEL_PURE_PYTHON=1 to skip the extension; the package then runs
    on the numpy fallback kernels selected at import time.
    """
    if os.environ.get("FEATSEL_PURE_PYTHON"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "featsel._core",
        ["src/featsel/_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # -ffp-contract=off: no FMA contraction; -fno-builtin-sin/-cos: stop
        # gcc fusing adjacent sin/cos into glibc sincos.  Both keep the
        # compiled RNG kernel bit-identical to the pure-Python one (glibc
        # sincos and sin can disagree by 1 ulp).
        extra_compile_args=[
            "-O3",
            "-ffp-contract=off",
            "-fno-builtin-sin",
            "-fno-builtin-cos",
        ],
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=extensions())
