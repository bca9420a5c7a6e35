"""Exact determinants of batches of small integer matrices (numpy, Bareiss)."""

from __future__ import annotations

import math

import numpy as np

_INT64_SAFE = 2**62


def hadamard_bound(max_abs: int, k: int) -> int:
    return (math.isqrt(k**k) + 1) * max_abs**k


def batch_det(A: np.ndarray) -> np.ndarray:
    """Exact determinants of integer matrices stacked along leading axes.

    Uses fraction-free Gaussian elimination with row pivoting.  Runs in int64
    when the Hadamard bound guarantees no overflow and in Python integers
    (object dtype) otherwise.
    """
    A = np.asarray(A)
    *batch, k, k2 = A.shape
    if k != k2:
        raise ValueError("matrices must be square")
    if k == 0:
        return np.ones(batch, dtype=np.int64)
    flat = A.reshape(-1, k, k)
    max_abs = int(np.abs(flat).max()) if flat.size else 0
    # intermediate products are bounded by the square of the largest minor
    if hadamard_bound(max_abs, k) ** 2 < _INT64_SAFE:
        M = flat.astype(np.int64, copy=True)
    else:
        M = flat.astype(object, copy=True)
    N = M.shape[0]
    rows = np.arange(N)
    sign = np.ones(N, dtype=np.int64)
    singular = np.zeros(N, dtype=bool)
    prev = np.ones(N, dtype=M.dtype)
    for c in range(k - 1):
        nz = M[:, c:, c] != 0
        has = nz.any(axis=1)
        singular |= ~has
        piv = nz.argmax(axis=1) + c
        swap = (piv != c) & has
        if swap.any():
            idx = rows[swap]
            pr = piv[swap]
            tmp = M[idx, c, :].copy()
            M[idx, c, :] = M[idx, pr, :]
            M[idx, pr, :] = tmp
            sign[swap] *= -1
        p = M[:, c, c].copy()
        p[p == 0] = 1
        lower = M[:, c + 1:, c][:, :, None]
        right = M[:, c, c + 1:][:, None, :]
        M[:, c + 1:, c + 1:] = (M[:, c + 1:, c + 1:] * p[:, None, None] - lower * right) // prev[:, None, None]
        prev = p
    det = M[:, k - 1, k - 1] * sign
    det[singular] = 0
    return det.reshape(batch)


def exact_det(rows) -> int:
    """Determinant of one integer or rational matrix via Fraction elimination."""
    from fractions import Fraction

    a = [[Fraction(x) for x in r] for r in rows]
    k = len(a)
    det = Fraction(1)
    for c in range(k):
        piv = next((r for r in range(c, k) if a[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, k):
            if a[r][c]:
                f = a[r][c] / a[c][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det
