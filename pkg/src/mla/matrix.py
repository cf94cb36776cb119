"""Column-major matrix storage, seeded fill, pivot bookkeeping, residuals.

Matrices are plain float64 numpy arrays in Fortran order; a view into a
larger allocation carries its leading dimension in the column stride, so
every routine in the package works on submatrix views without copies.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit


def alloc_matrix(rows: int, cols: int, ld: int | None = None) -> np.ndarray:
    """Allocate a zeroed column-major matrix, optionally inside ld x cols storage."""
    if rows < 0 or cols < 0:
        raise ValueError("rows and cols must be >= 0")
    if ld is None:
        ld = rows
    if ld < rows:
        raise ValueError("leading dimension smaller than rows")
    buf = np.zeros((max(ld, 1), cols), dtype=np.float64, order="F")
    return buf[:rows, :]


def leading_dimension(a: np.ndarray) -> int:
    """Column stride of a column-major view, in elements."""
    if a.ndim != 2:
        raise ValueError("expected a 2-d array")
    if a.shape[1] <= 1 and a.shape[0] <= 1:
        return max(a.shape[0], 1)
    return a.strides[1] // a.itemsize


def partition_2x2(a: np.ndarray, i: int, j: int):
    """Split a at row i, column j into (a11, a12, a21, a22) views."""
    m, n = a.shape
    if not (0 <= i <= m and 0 <= j <= n):
        raise ValueError(f"split ({i}, {j}) out of range for {m} x {n}")
    return a[:i, :j], a[:i, j:], a[i:, :j], a[i:, j:]


# SplitMix64 stream, one draw per entry, columns filled left to right.
# The mix constants are the standard ones; the (0,1) map keeps the open
# interval exactly in binary64 (see ((x >> 11) + 1) / (2^53 + 2)).
@njit(cache=True)
def _splitmix64_fill(a, seed):  # pragma: no cover - exercised via fill_random
    state = seed
    for j in range(a.shape[1]):
        for i in range(a.shape[0]):
            state = state + np.uint64(0x9E3779B97F4A7C15)
            z = state
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            z = z ^ (z >> np.uint64(31))
            u = np.float64(z >> np.uint64(11))
            a[i, j] = (u + 1.0) / 9007199254740994.0
    return a


def fill_random(a: np.ndarray, seed: int) -> np.ndarray:
    """Fill a in place with SplitMix64 draws in (0, 1); deterministic per seed."""
    if a.ndim != 2:
        raise ValueError("expected a 2-d array")
    _splitmix64_fill(a, np.uint64(seed))
    return a


def frobenius_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


@dataclass
class PivotVector:
    """Row-interchange list: step k swapped view rows k and ipiv[k].

    Indices are local to the matrix view the factorization ran on;
    `offset` records where that view started inside the parent matrix,
    for callers that assemble a global pivot vector.
    """

    ipiv: np.ndarray
    offset: int = 0

    def __post_init__(self) -> None:
        self.ipiv = np.asarray(self.ipiv, dtype=np.int64)
        if self.ipiv.ndim != 1:
            raise ValueError("ipiv must be 1-d")

    def __len__(self) -> int:
        return int(self.ipiv.shape[0])


def swap_rows(a: np.ndarray, piv: PivotVector | np.ndarray, reverse: bool = False) -> np.ndarray:
    """Apply interchanges to all columns of a, ascending (reverse to undo).

    Host-side helper for residual checks and small fixtures; the
    team-parallel equivalent lives in kernels.laswp.
    """
    ipiv = piv.ipiv if isinstance(piv, PivotVector) else np.asarray(piv, dtype=np.int64)
    if ipiv.size and (ipiv.min() < 0 or ipiv.max() >= a.shape[0]):
        raise IndexError("pivot index out of range")
    order = range(len(ipiv) - 1, -1, -1) if reverse else range(len(ipiv))
    for k in order:
        p = int(ipiv[k])
        if p != k:
            tmp = a[k, :].copy()
            a[k, :] = a[p, :]
            a[p, :] = tmp
    return a


def split_lu(factors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Extract unit-lower L (m x n) and upper U (n x n) from packed factors."""
    m, n = factors.shape
    lower = np.tril(factors, -1)[:, :n] + np.eye(m, n)
    upper = np.triu(factors[:n, :])
    return np.asfortranarray(lower), np.asfortranarray(upper)


def residual_lu(a_orig: np.ndarray, lower: np.ndarray, upper: np.ndarray,
                piv: PivotVector | np.ndarray) -> float:
    """Backward error ||P A - L U||_F / ||A||_F of a pivoted factorization."""
    pa = np.array(a_orig, dtype=np.float64, order="F", copy=True)
    swap_rows(pa, piv)
    r = pa - lower @ upper
    denom = frobenius_norm(a_orig)
    if denom == 0.0:
        return frobenius_norm(r)
    return frobenius_norm(r) / denom
