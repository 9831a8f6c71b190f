"""Build script for the compiled closed-loop kernel.

The extension is optional: if Cython (or a C compiler) is unavailable the
package installs pure-Python and relayesc._kernel falls back to the
reference loop. -ffp-contract=off keeps the compiled arithmetic
bit-identical to the Python fallback (no FMA contraction).
"""

from setuptools import setup

try:
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "relayesc._kernel._cloop",
                ["src/relayesc/_kernel/_cloop.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
