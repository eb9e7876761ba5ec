"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
implementation takes over.  Set ``KNOTLINKS_PURE_PYTHON=1`` to force the
fallback.
"""
import logging
import os

from . import _pykernels

log = logging.getLogger(__name__)

_BACKENDS = {"python": _pykernels}

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
else:
    _BACKENDS["cython"] = _ckernels

if _ckernels is not None and os.environ.get("KNOTLINKS_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "cython"
else:
    BACKEND = "python"
    log.debug("using pure-python kernels")


def available():
    return sorted(_BACKENDS)


def get(name=None):
    """Return the kernel module for ``name`` (default: the import-time choice)."""
    name = name or BACKEND
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} not available; have {available()}") from None
