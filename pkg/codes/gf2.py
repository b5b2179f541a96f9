"""
GF(2) linear algebra
--------------------
Row reduction, rank, null space and row-space membership for binary
matrices stored as numpy uint8 arrays.
"""

from __future__ import annotations

import numpy as np


def as_gf2(matrix) -> np.ndarray:
    array = np.asarray(matrix, dtype=np.uint8) & 1
    return array.reshape(1, -1) if array.ndim == 1 else array


def row_reduce(matrix) -> tuple[np.ndarray, list[int]]:
    """Reduced row-echelon form and the pivot columns."""
    m      = as_gf2(matrix).copy()
    pivots = []
    row    = 0
    for col in range(m.shape[1]):
        if row >= m.shape[0]:
            break
        hits = np.flatnonzero(m[row:, col]) + row
        if hits.size == 0:
            continue
        pivot = hits[0]
        if pivot != row:
            m[[row, pivot]] = m[[pivot, row]]
        others = np.flatnonzero(m[:, col])
        others = others[others != row]
        m[others] ^= m[row]
        pivots.append(col)
        row += 1
    return m[:row], pivots


def rank(matrix) -> int:
    if np.asarray(matrix).size == 0:
        return 0
    return len(row_reduce(matrix)[1])


def nullspace(matrix) -> np.ndarray:
    """Basis (rows) of {v : M v = 0}."""
    m = as_gf2(matrix)
    n = m.shape[1]
    reduced, pivots = row_reduce(m)
    free  = [c for c in range(n) if c not in pivots]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for r, p in enumerate(pivots):
            basis[i, p] = reduced[r, f]
    return basis


def in_rowspace(matrix, vector) -> bool:
    m = as_gf2(matrix)
    v = as_gf2(vector)
    if m.size == 0:
        return not v.any()
    return rank(np.vstack([m, v])) == rank(m)


def span(basis: np.ndarray) -> np.ndarray:
    """All 2^k combinations of the basis rows (k small)."""
    basis = as_gf2(basis)
    k     = basis.shape[0]
    if k > 24:
        raise ValueError(f"❌ Refusing to enumerate a span of dimension {k}")
    coeffs = ((np.arange(1 << k)[:, None] >> np.arange(k)) & 1).astype(np.uint8)
    return (coeffs @ basis) & 1
