"""Batched small dense complex solves, the hot kernel of the transform.

Two interchangeable backends provide ``solve_batch(a, b=None, bt=None)``:

* ``_csolve``  - Cython extension, built when a C toolchain is available;
* ``_pysolve`` - pure NumPy fallback, vectorized across the node batch.

The compiled backend is preferred at import time; set the environment
variable ``MOUTARD_NO_EXT=1`` to force the fallback (used by the benchmark
and for debugging).  ``BACKEND`` records which one is active.

Contract of ``solve_batch``: ``a`` is an ``(m, n, n)`` complex stack, ``b``
an optional ``(m, n, kb)`` block of right-hand sides solved against ``a``,
``bt`` an optional ``(m, n, kt)`` block solved against ``a`` transposed.
Returns ``(x, xt, det)``; determinants come from the pivot diagonal of the
untransposed factorization, exactly singular nodes yield ``det == 0`` with
NaN solution columns, and no inverse is ever formed.
"""

import os

from . import _pysolve

if os.environ.get("MOUTARD_NO_EXT"):
    _impl = _pysolve
    BACKEND = "python"
else:
    try:
        from . import _csolve as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _pysolve
        BACKEND = "python"

solve_batch = _impl.solve_batch

__all__ = ["solve_batch", "BACKEND"]
