"""Honor the VENDI_THREADS cap before any BLAS-backed import happens."""

import os

_BLAS_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)


def apply_thread_cap():
    """Propagate VENDI_THREADS to the BLAS thread-count variables.

    Only takes effect if called before numpy loads its BLAS, which is why
    the package __init__ runs this first. Explicitly-set BLAS variables win.
    """
    cap = os.environ.get("VENDI_THREADS")
    if not cap:
        return
    try:
        value = str(max(1, int(cap)))
    except ValueError:
        return
    for var in _BLAS_VARS:
        os.environ.setdefault(var, value)
