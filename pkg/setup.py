"""Build script: compiles the optional C extension kernel.

The package works without the extension (a pure Python fallback is selected
at import time), so any build failure here downgrades to a plain install
rather than aborting.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "matchkit._kernels._ckern",
                ["src/matchkit/_kernels/_ckern.pyx"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"matchkit: skipping C kernel build ({exc}); pure Python fallback will be used")
    ext_modules = []

setup(ext_modules=ext_modules)
