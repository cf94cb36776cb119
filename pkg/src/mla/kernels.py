"""Packed cache-blocked kernels: matrix multiply, triangular solve, row swaps.

The multiply follows the usual five-loop blocked structure: macro blocks
of A (m_c x k_c) and B (k_c x n_c) are packed into slab buffers, then a
register-tile micro-kernel sweeps micro-panels. Parallelism is SPMD over
a team: loop-4 micro-panel columns are dealt round-robin to members, so
each C micro-tile has exactly one owner and the micro-kernel accumulates
its dot products in a fixed ascending-k order. Output bits therefore do
not depend on team size, merge timing, or where the m/n tiling falls.

gemm_malleable additionally polls a CompletionFlag at the start of every
macro block (just before packing A); a set flag absorbs the partner
team's parked workers, who re-enter the block loop right there and
co-pack and co-compute the remaining blocks.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .config import CacheConfig
from .matrix import PivotVector
from .pool import MERGED, TeamContext, checkpoint_merge, serial_context


def _share(n: int, rank: int, size: int) -> tuple[int, int]:
    """Contiguous balanced slice [lo, hi) of range(n) for this rank."""
    q, r = divmod(n, size)
    lo = rank * q + min(rank, r)
    return lo, lo + q + (1 if rank < r else 0)


# -- packing ----------------------------------------------------------------
#
# A block (mb x kb) packs into ceil(mb/m_r) slabs of m_r x kb, column by
# column inside a slab; B (kb x nb) into ceil(nb/n_r) slabs of kb x n_r,
# row by row. Rows/columns past the matrix edge pack as zeros, so the
# micro-kernel never branches on the fringe.

@njit(cache=True, nogil=True)
def _pack_a_slabs(block, out, m_r, rank, size):  # pragma: no cover - jit
    mb, kb = block.shape
    n_slabs = (mb + m_r - 1) // m_r
    for s in range(rank, n_slabs, size):
        base = s * m_r * kb
        i0 = s * m_r
        for p in range(kb):
            col = base + p * m_r
            for r in range(m_r):
                i = i0 + r
                out[col + r] = block[i, p] if i < mb else 0.0


@njit(cache=True, nogil=True)
def _pack_b_slabs(block, out, n_r, rank, size):  # pragma: no cover - jit
    kb, nb = block.shape
    n_slabs = (nb + n_r - 1) // n_r
    for s in range(rank, n_slabs, size):
        base = s * n_r * kb
        j0 = s * n_r
        for p in range(kb):
            row = base + p * n_r
            for c in range(n_r):
                j = j0 + c
                out[row + c] = block[p, j] if j < nb else 0.0


@dataclass
class PackedBuffer:
    """One packed macro block: slab-major storage plus its tiling metadata."""

    kind: str          # "A" or "B"
    data: np.ndarray   # 1-d float64, n_slabs * tile * depth entries
    tile: int          # m_r (A) or n_r (B)
    depth: int         # k extent of the block
    extent: int        # rows (A) or columns (B) actually packed

    @property
    def n_slabs(self) -> int:
        return (self.extent + self.tile - 1) // self.tile


def pack_a(block: np.ndarray, cfg: CacheConfig | None = None,
           team: TeamContext | None = None) -> PackedBuffer:
    """Pack an A macro block into m_r-row slabs; cooperative over the team."""
    cfg = cfg or CacheConfig.from_env()
    team = team or serial_context()
    mb, kb = block.shape
    n_slabs = (mb + cfg.m_r - 1) // cfg.m_r
    buf = team.collective(lambda: np.empty(n_slabs * cfg.m_r * kb, dtype=np.float64))
    if mb and kb:
        with team.traced("PACK_A"):
            _pack_a_slabs(block, buf, cfg.m_r, team.rank, team.size)
    team.barrier()
    return PackedBuffer("A", buf, cfg.m_r, kb, mb)


def pack_b(block: np.ndarray, cfg: CacheConfig | None = None,
           team: TeamContext | None = None) -> PackedBuffer:
    """Pack a B macro block into n_r-column slabs; cooperative over the team."""
    cfg = cfg or CacheConfig.from_env()
    team = team or serial_context()
    kb, nb = block.shape
    n_slabs = (nb + cfg.n_r - 1) // cfg.n_r
    buf = team.collective(lambda: np.empty(n_slabs * cfg.n_r * kb, dtype=np.float64))
    if kb and nb:
        with team.traced("PACK_B"):
            _pack_b_slabs(block, buf, cfg.n_r, team.rank, team.size)
    team.barrier()
    return PackedBuffer("B", buf, cfg.n_r, kb, nb)


# -- micro and macro kernels --------------------------------------------------

@njit(cache=True, nogil=True)
def _tile_product(apack, abase, bpack, bbase, kb, m_r, n_r, acc):  # pragma: no cover
    for j in range(n_r):
        for i in range(m_r):
            acc[i, j] = 0.0
    for p in range(kb):
        ao = abase + p * m_r
        bo = bbase + p * n_r
        for j in range(n_r):
            bv = bpack[bo + j]
            for i in range(m_r):
                acc[i, j] += apack[ao + i] * bv


@njit(cache=True, nogil=True)
def _macro_block(apack, bpack, c, kb, m_r, n_r, rank, size, alpha, beta,
                 first):  # pragma: no cover - jit
    mb, nb = c.shape
    m_slabs = (mb + m_r - 1) // m_r
    n_slabs = (nb + n_r - 1) // n_r
    acc = np.empty((m_r, n_r), dtype=np.float64)
    for jr in range(rank, n_slabs, size):
        j0 = jr * n_r
        jw = min(n_r, nb - j0)
        for ir in range(m_slabs):
            i0 = ir * m_r
            iw = min(m_r, mb - i0)
            _tile_product(apack, ir * m_r * kb, bpack, jr * n_r * kb,
                          kb, m_r, n_r, acc)
            if first:
                for j in range(jw):
                    for i in range(iw):
                        c[i0 + i, j0 + j] = alpha * c[i0 + i, j0 + j] + beta * acc[i, j]
            else:
                for j in range(jw):
                    for i in range(iw):
                        c[i0 + i, j0 + j] = c[i0 + i, j0 + j] + beta * acc[i, j]


@njit(cache=True, nogil=True)
def _scale_columns(c, alpha, lo, hi):  # pragma: no cover - jit
    for j in range(lo, hi):
        for i in range(c.shape[0]):
            c[i, j] = alpha * c[i, j]


def micro_kernel(a: np.ndarray, b: np.ndarray, c: np.ndarray,
                 alpha: float = 1.0, beta: float = 1.0) -> None:
    """Register-tile update c := alpha*c + beta*(a @ b), fixed ascending-k sums.

    a is one A slab (m_r x k), b one B slab (k x n_r); c is the owned
    micro-tile. Exposed mostly so the accumulation-order contract has a
    directly testable unit.
    """
    m_r, k = a.shape
    k2, n_r = b.shape
    if k != k2 or c.shape != (m_r, n_r):
        raise ValueError("micro tile shapes disagree")
    apack = np.ravel(a, order="F").astype(np.float64)
    bpack = np.ravel(b, order="C").astype(np.float64)
    _macro_block(apack, bpack, c, k, m_r, n_r, 0, 1, float(alpha), float(beta), True)


# -- blocked multiply ---------------------------------------------------------

class _GemmPlan:
    """Shared per-call state: clamped tiling, step list, packing buffers."""

    __slots__ = ("cfg", "steps", "apack", "bpack")

    def __init__(self, m: int, n: int, k: int, cfg: CacheConfig) -> None:
        self.cfg = cfg
        m_c = min(cfg.m_c, ((m + cfg.m_r - 1) // cfg.m_r) * cfg.m_r)
        n_c = min(cfg.n_c, ((n + cfg.n_r - 1) // cfg.n_r) * cfg.n_r)
        k_c = min(cfg.k_c, k)
        self.apack = np.empty(m_c * k_c, dtype=np.float64)
        self.bpack = np.empty(k_c * n_c, dtype=np.float64)
        steps = []
        for jc in range(0, n, cfg.n_c):
            nb = min(cfg.n_c, n - jc)
            for pc in range(0, k, cfg.k_c):
                kb = min(cfg.k_c, k - pc)
                for ic in range(0, m, cfg.m_c):
                    mb = min(cfg.m_c, m - ic)
                    steps.append((jc, nb, pc, kb, ic, mb))
        self.steps = steps


def gemm_malleable(c: np.ndarray, a: np.ndarray, b: np.ndarray,
                   alpha: float = 1.0, beta: float = 1.0,
                   cfg: CacheConfig | None = None,
                   team: TeamContext | None = None,
                   flag=None) -> None:
    """Blocked matrix update c := alpha*c + beta*(a @ b), collective over team.

    With a CompletionFlag, every macro-block start is a merge entry
    point: if the partner team has finished, its parked workers join
    here, co-pack the next A block, and take their round-robin share of
    the remaining work. Results are bitwise independent of all of that.
    """
    m, n = c.shape
    ma, k = a.shape
    kb2, nb2 = b.shape
    if ma != m or kb2 != k or nb2 != n:
        raise ValueError(f"gemm shapes disagree: c {c.shape}, a {a.shape}, b {b.shape}")
    team = team or serial_context()
    cfg = cfg or CacheConfig.from_env()
    if m == 0 or n == 0:
        return
    if k == 0:
        if alpha != 1.0:
            lo, hi = _share(n, team.rank, team.size)
            if hi > lo:
                _scale_columns(c, float(alpha), lo, hi)
        team.barrier()
        return
    plan = team.collective(lambda: _GemmPlan(m, n, k, cfg))
    _gemm_steps(team, plan, c, a, b, float(alpha), float(beta), flag, 0)


def _gemm_steps(team: TeamContext, plan: _GemmPlan, c, a, b, alpha, beta,
                flag, start: int) -> None:
    cfg = plan.cfg
    steps = plan.steps
    for idx in range(start, len(steps)):
        if flag is not None and team.team.id != MERGED:
            def _resume(nctx: TeamContext, _idx: int = idx) -> None:
                _gemm_steps(nctx, plan, c, a, b, alpha, beta, None, _idx)
            checkpoint_merge(team, flag, _resume)
        jc, nb, pc, kb, ic, mb = steps[idx]
        rank, size = team.rank, team.size
        if ic == 0:
            with team.traced("PACK_B"):
                _pack_b_slabs(b[pc:pc + kb, jc:jc + nb], plan.bpack,
                              cfg.n_r, rank, size)
        with team.traced("PACK_A"):
            _pack_a_slabs(a[ic:ic + mb, pc:pc + kb], plan.apack,
                          cfg.m_r, rank, size)
        team.barrier()
        with team.traced("GEMM"):
            _macro_block(plan.apack, plan.bpack, c[ic:ic + mb, jc:jc + nb],
                         kb, cfg.m_r, cfg.n_r, rank, size, alpha, beta, pc == 0)
        team.barrier()


# -- triangular solve and row swaps -------------------------------------------

@njit(cache=True, nogil=True)
def _trsm_cols(low, x, lo, hi):  # pragma: no cover - jit
    n = low.shape[0]
    for j in range(lo, hi):
        for i in range(1, n):
            s = 0.0
            for l in range(i):
                s += low[i, l] * x[l, j]
            x[i, j] = x[i, j] - s


def trsm_llu(a11: np.ndarray, b: np.ndarray,
             team: TeamContext | None = None) -> None:
    """Solve trilu(a11) @ x = b in place; unit lower triangle, columns split.

    Only the strictly lower part of a11 is read; each team member owns a
    contiguous column range, so per-column arithmetic never depends on
    the team size.
    """
    nb, nb2 = a11.shape
    if nb != nb2:
        raise ValueError("triangular factor must be square")
    if b.shape[0] != nb:
        raise ValueError("right-hand side rows disagree with the factor")
    team = team or serial_context()
    lo, hi = _share(b.shape[1], team.rank, team.size)
    if hi > lo and nb > 1:
        with team.traced("TRSM"):
            _trsm_cols(a11, b, lo, hi)
    team.barrier()


@njit(cache=True, nogil=True)
def _swap_cols(a, ipiv, lo, hi, reverse):  # pragma: no cover - jit
    npiv = ipiv.shape[0]
    for j in range(lo, hi):
        if reverse:
            for t in range(npiv - 1, -1, -1):
                p = ipiv[t]
                if p != t:
                    tmp = a[t, j]
                    a[t, j] = a[p, j]
                    a[p, j] = tmp
        else:
            for t in range(npiv):
                p = ipiv[t]
                if p != t:
                    tmp = a[t, j]
                    a[t, j] = a[p, j]
                    a[p, j] = tmp


def laswp(a: np.ndarray, piv: PivotVector | np.ndarray,
          team: TeamContext | None = None, reverse: bool = False) -> None:
    """Apply row interchanges to every column of a, columns split over team.

    Interchange k swaps view rows k and ipiv[k], ascending (descending
    with reverse=True, which undoes the forward order). Indices are
    validated against the view before anything is touched.
    """
    ipiv = piv.ipiv if isinstance(piv, PivotVector) else np.asarray(piv, dtype=np.int64)
    team = team or serial_context()
    if ipiv.size and (ipiv.min() < 0 or ipiv.max() >= a.shape[0]):
        raise IndexError("pivot index out of range for this view")
    lo, hi = _share(a.shape[1], team.rank, team.size)
    if hi > lo and ipiv.size:
        with team.traced("LASWP"):
            _swap_cols(a, ipiv, lo, hi, reverse)
    team.barrier()
