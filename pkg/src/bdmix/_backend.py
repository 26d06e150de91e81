"""Select the compiled kernels when available, else the numpy fallback.

Set ``BDMIX_PURE_PYTHON=1`` to force the fallback.  Callers look up
``kernels.<name>`` at call time, so :func:`use` switches globally.
"""
import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

HAVE_COMPILED = _compiled is not None

if HAVE_COMPILED and not os.environ.get("BDMIX_PURE_PYTHON"):
    kernels = _compiled
else:
    kernels = _kernels_py


def name() -> str:
    return "compiled" if kernels is _compiled else "python"


def use(which: str) -> None:
    """Switch to ``"compiled"`` or ``"python"`` kernels."""
    global kernels
    if which == "compiled":
        if not HAVE_COMPILED:
            raise ImportError("compiled kernels are not built")
        kernels = _compiled
    elif which == "python":
        kernels = _kernels_py
    else:
        raise ValueError(f"unknown backend {which!r}")
