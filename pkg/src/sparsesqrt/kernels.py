"""Kernel backend selection.

The compiled extension is used when it imports; otherwise (or when
``SPARSESQRT_PURE=1`` is set before import) the numpy implementations are
used. ``BACKEND`` names the active choice and ``use_backend`` swaps it at
runtime, which the benchmark and the parity tests rely on.
"""

import os
from contextlib import contextmanager

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels

BACKEND = "python" if os.environ.get("SPARSESQRT_PURE") or _ckernels is None else "cython"
_active = _BACKENDS[BACKEND]


def available():
    return sorted(_BACKENDS)


def use_backend(name):
    """Switch the active kernel set; returns the previous backend name."""
    global BACKEND, _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {available()}")
    previous, BACKEND, _active = BACKEND, name, _BACKENDS[name]
    return previous


def matmul(*args):
    return _active.matmul(*args)


def add(*args):
    return _active.add(*args)


def column_filter(*args):
    return _active.column_filter(*args)


def scan_region(*args):
    return _active.scan_region(*args)


@contextmanager
def flushed_subnormals():
    """Run the block with subnormal results flushed to zero, when the
    compiled extension can set the FPU mode; otherwise a no-op.

    Dense LAPACK and BLAS calls on decaying matrices slow down several-fold
    once entries reach the subnormal range.
    """
    if _ckernels is None:
        yield False
        return
    previous = _ckernels.set_flush_subnormals(True)
    try:
        yield previous is not None
    finally:
        if previous is not None:
            _ckernels.set_flush_subnormals(previous)
