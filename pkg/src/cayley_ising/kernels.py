"""Kernel backend selection.

The compiled extension is used when it was built; setting the environment
variable ``CAYLEY_ISING_PURE_PYTHON=1`` forces the pure-Python kernels.
"""

import os

from cayley_ising import _pykernels as python_backend

try:
    from cayley_ising import _ckernels as compiled_backend
except ImportError:  # extension not built
    compiled_backend = None

if compiled_backend is not None and not os.environ.get("CAYLEY_ISING_PURE_PYTHON"):
    backend = compiled_backend
    BACKEND = "cython"
else:
    backend = python_backend
    BACKEND = "python"


def get_backend(name=None):
    """Return the kernel module for ``name`` ("cython", "python" or None for
    the default)."""
    if name is None:
        return backend
    if name == "python":
        return python_backend
    if name == "cython":
        if compiled_backend is None:
            raise ImportError("the compiled kernels are not built")
        return compiled_backend
    raise ValueError(f"unknown kernel backend {name!r}")
