"""Select the compiled kernel tables when available, else the numpy fallback.

Set ``PIGP_PURE_PYTHON=1`` to force the fallback at import, or call
:func:`set_backend` at run time (used by the benchmark and the
backend-equivalence tests).
"""

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKEND = "python"
se_table = _pykernels.se_table
rq_table = _pykernels.rq_table
per_table = _pykernels.per_table


def available() -> list[str]:
    return ["python"] + (["cython"] if _ckernels is not None else [])


def set_backend(name: str) -> str:
    """Switch kernel tables to ``"cython"`` or ``"python"``; returns the previous name."""
    global BACKEND, se_table, rq_table, per_table
    if name not in available():
        raise ValueError(f"backend {name!r} not available; have {available()}")
    mod = _ckernels if name == "cython" else _pykernels
    prev = BACKEND
    BACKEND = name
    se_table, rq_table, per_table = mod.se_table, mod.rq_table, mod.per_table
    return prev


if _ckernels is not None and os.environ.get("PIGP_PURE_PYTHON", "") != "1":
    set_backend("cython")
