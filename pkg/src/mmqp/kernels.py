"""Backend selection for the hot Givens kernel.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``MMQP_PURE_PYTHON`` is set to a non-empty value other
than ``0``, the numpy fallback is used.
"""
import os

from . import _givens_py

BACKEND = "python"
retriangularize = _givens_py.retriangularize

if os.environ.get("MMQP_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _givens as _compiled
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        retriangularize = _compiled.retriangularize
        BACKEND = "cython"


def available_backends():
    """Map backend name -> kernel function for every importable backend."""
    out = {"python": _givens_py.retriangularize}
    try:
        from . import _givens
        out["cython"] = _givens.retriangularize
    except ImportError:
        pass
    return out
