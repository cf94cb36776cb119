"""Slow, obviously-correct references for tests and --check mode.

Nothing here shares code with the production kernels: the multiply is a
plain ijk triple loop, the solve substitutes one column at a time, and
the LU is the textbook right-looking loop. lu_ref optionally runs on an
instrumented tally that counts every scalar multiply, add and divide it
performs, which is what flop_count exposes.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .lu import LuResult
from .matrix import PivotVector


@njit(cache=True)
def _gemm_ijk(c, a, b, alpha, beta):  # pragma: no cover - jit
    m, n = c.shape
    k = a.shape[1]
    for i in range(m):
        for j in range(n):
            s = 0.0
            for p in range(k):
                s += a[i, p] * b[p, j]
            c[i, j] = alpha * c[i, j] + beta * s


def gemm_ref(c: np.ndarray, a: np.ndarray, b: np.ndarray,
             alpha: float = 1.0, beta: float = 1.0) -> None:
    """c := alpha*c + beta*(a @ b), ijk triple loop with ascending-k sums."""
    m, n = c.shape
    if a.shape[0] != m or b.shape != (a.shape[1], n):
        raise ValueError(f"shape mismatch: c {c.shape}, a {a.shape}, b {b.shape}")
    _gemm_ijk(c, a, b, float(alpha), float(beta))


@njit(cache=True)
def _trsm_forward(low, x):  # pragma: no cover - jit
    n = low.shape[0]
    for j in range(x.shape[1]):
        for i in range(n):
            s = x[i, j]
            for l in range(i):
                s = s - low[i, l] * x[l, j]
            x[i, j] = s


def trsm_ref(a11: np.ndarray, b: np.ndarray) -> None:
    """b := trilu(a11)^{-1} b by per-column forward substitution."""
    n, n2 = a11.shape
    if n != n2 or b.shape[0] != n:
        raise ValueError("triangular solve shapes disagree")
    _trsm_forward(a11, b)


class FlopTally:
    """Counting arithmetic: one tick per multiply, add, subtract or divide."""

    __slots__ = ("flops",)

    def __init__(self) -> None:
        self.flops = 0

    def mul(self, x: float, y: float) -> float:
        self.flops += 1
        return x * y

    def add(self, x: float, y: float) -> float:
        self.flops += 1
        return x + y

    def sub(self, x: float, y: float) -> float:
        self.flops += 1
        return x - y

    def div(self, x: float, y: float) -> float:
        self.flops += 1
        return x / y


def flop_count(run) -> int:
    """Execute run(tally) and report how many scalar flops it performed."""
    tally = FlopTally()
    run(tally)
    return tally.flops


def lu_ref(a: np.ndarray, ipiv: np.ndarray | None = None,
           tally: FlopTally | None = None) -> LuResult:
    """Textbook right-looking pivoted LU, in place; single worker.

    With a tally every arithmetic operation routes through it, so
    flop_count sees the true operation count.
    """
    m, n = a.shape
    if m < n:
        raise ValueError("need m >= n")
    if ipiv is None:
        ipiv = np.empty(n, dtype=np.int64)
    singular = False
    for j in range(n):
        p = j
        best = abs(a[j, j])
        for i in range(j + 1, m):
            v = abs(a[i, j])
            if v > best:
                best = v
                p = i
        ipiv[j] = p
        if best == 0.0:
            singular = True
            continue
        if p != j:
            row = np.copy(a[j, :])
            a[j, :] = a[p, :]
            a[p, :] = row
        alpha = a[j, j]
        if tally is None:
            for i in range(j + 1, m):
                a[i, j] /= alpha
            for i in range(j + 1, m):
                for t in range(j + 1, n):
                    a[i, t] -= a[i, j] * a[j, t]
        else:
            for i in range(j + 1, m):
                a[i, j] = tally.div(a[i, j], alpha)
            for i in range(j + 1, m):
                for t in range(j + 1, n):
                    a[i, t] = tally.sub(a[i, t], tally.mul(a[i, j], a[j, t]))
    return LuResult(PivotVector(ipiv), n, singular)
