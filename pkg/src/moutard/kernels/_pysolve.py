"""Pure NumPy implementation of the batched small-matrix solve.

Semantics match ``_csolve`` exactly: per-node Gaussian elimination with
partial pivoting, vectorized across the node batch.  Determinants come from
the pivot diagonal; exactly singular nodes get ``det == 0`` and NaN-filled
solution columns, near-singular nodes are left to the caller's mask.
"""

from __future__ import annotations

import numpy as np

_CNAN = complex(float("nan"), float("nan"))


def _pivoted_solve(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eliminate in place on copies ``a`` (m,n,n) and ``b`` (m,n,k)."""
    m, n = a.shape[0], a.shape[1]
    det = np.ones(m, dtype=np.complex128)
    rows = np.arange(m)
    for col in range(n):
        p = np.argmax(np.abs(a[:, col:, col]), axis=1) + col
        swapped = p != col
        det[swapped] = -det[swapped]
        hold = a[rows, p, :].copy()
        a[rows, p, :] = a[:, col, :]
        a[rows, col, :] = hold
        if b.shape[2]:
            hold = b[rows, p, :].copy()
            b[rows, p, :] = b[:, col, :]
            b[rows, col, :] = hold
        piv = a[:, col, col]
        det *= piv
        if col + 1 < n:
            with np.errstate(divide="ignore", invalid="ignore"):
                lam = a[:, col + 1 :, col] / piv[:, None]
            lam[piv == 0] = 0.0
            a[:, col + 1 :, col + 1 :] -= lam[:, :, None] * a[:, col, col + 1 :][:, None, :]
            if b.shape[2]:
                b[:, col + 1 :, :] -= lam[:, :, None] * b[:, col, :][:, None, :]
            a[:, col + 1 :, col] = 0.0
    x = np.empty_like(b)
    if b.shape[2]:
        with np.errstate(divide="ignore", invalid="ignore"):
            for row in range(n - 1, -1, -1):
                acc = b[:, row, :].copy()
                if row + 1 < n:
                    acc -= np.einsum("mk,mkj->mj", a[:, row, row + 1 :], x[:, row + 1 :, :])
                x[:, row, :] = acc / a[:, row, row][:, None]
        x[det == 0] = _CNAN
    return x, det


def solve_batch(a, b=None, bt=None):
    """Solve a batch of small dense complex systems by pivoted elimination.

    Parameters
    ----------
    a : (m, n, n) array
        One matrix per node.
    b : (m, n, kb) array, optional
        Right-hand sides solved against ``a``.
    bt : (m, n, kt) array, optional
        Right-hand sides solved against ``a`` transposed.

    Returns
    -------
    (x, xt, det)
        Solutions for ``b`` and ``bt`` (``None`` where the input was absent)
        and the per-node determinant of ``a``.
    """
    a = np.asarray(a, dtype=np.complex128)
    m, n = a.shape[0], a.shape[1]
    if b is None:
        b_work = np.empty((m, n, 0), dtype=np.complex128)
    else:
        b_work = np.array(b, dtype=np.complex128)
    x, det = _pivoted_solve(a.copy(), b_work)
    xt = None
    if bt is not None:
        at = np.ascontiguousarray(np.swapaxes(a, 1, 2))
        xt, _ = _pivoted_solve(at, np.array(bt, dtype=np.complex128))
    return (x if b is not None else None), xt, det
