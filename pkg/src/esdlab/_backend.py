"""Kernel selection: the compiled extension when importable, else numpy.

Set ``ESDLAB_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

python = _pykernels

if os.environ.get("ESDLAB_PURE_PYTHON", "") not in ("", "0"):
    compiled = None
else:
    try:
        from . import _kernels as compiled
    except ImportError:  # extension not built
        compiled = None

kernels = compiled if compiled is not None else python
NAME = "compiled" if compiled is not None else "python"


def get(name=None):
    """Return the kernel module ``name`` ("compiled" or "python"), default active."""
    if name is None:
        return kernels
    if name == "python":
        return python
    if name == "compiled":
        if compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return compiled
    raise ValueError(f"unknown backend {name!r}")


def use(name):
    """Make ``name`` the default backend for subsequent calls."""
    global kernels, NAME
    kernels = get(name)
    NAME = name
