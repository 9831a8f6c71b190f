"""Closed-loop engine backends.

The hot loop exists twice: a compiled Cython extension (_cloop) and a pure
Python reference (pyloop). Import prefers the compiled one; set
RELAYESC_BACKEND=python|cython (or pass backend= through the harness) to
force a choice. Both produce bit-identical trajectories.
"""

from __future__ import annotations

import os

from . import pyloop

try:
    from . import _cloop
    HAVE_COMPILED = True
except ImportError:
    _cloop = None
    HAVE_COMPILED = False

BACKENDS = ("auto", "python", "cython")


def get_backend(name: str | None = None):
    """Resolve a backend module from a name ('auto', 'python', 'cython')."""
    if name is None:
        name = os.environ.get("RELAYESC_BACKEND", "auto")
    if name == "auto":
        return _cloop if HAVE_COMPILED else pyloop
    if name == "python":
        return pyloop
    if name == "cython":
        if not HAVE_COMPILED:
            raise RuntimeError(
                "compiled kernel unavailable (build the extension or use backend='python')"
            )
        return _cloop
    raise ValueError(f"unknown backend {name!r}, expected one of {BACKENDS}")


def backend_name(module) -> str:
    return "cython" if (HAVE_COMPILED and module is _cloop) else "python"
