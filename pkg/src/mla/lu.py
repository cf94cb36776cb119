"""Blocked LU factorizations with partial pivoting and the look-ahead driver.

Factors overwrite the input: unit-lower L strictly below the diagonal,
U on and above. Pivot entries are view-local and satisfy ipiv[k] >= k;
ties in the column maximum go to the lowest row index, and an exactly
zero pivot column is recorded (zero multipliers, singular flag) and
skipped, so factorization always runs to completion.

The driver lu_la executes one of five policies over a WorkerPool. Every
iteration splits the trailing matrix into the next panel's columns (team
PF: trsm, gemm, panel LU) and the remainder (team RU: trsm, gemm), with
the policy deciding how RU's update cooperates with PF: not at all
(lu_la), by re-checking membership between q column blocks
(lu_ws_static), through a malleable gemm that absorbs PF's workers at
block boundaries (lu_mb), or additionally letting RU stop the panel
early (lu_et). Plain lu runs the same arithmetic on one team, which is
why lu, lu_la, lu_ws_static and lu_mb agree bitwise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .config import CacheConfig, Policy
from .kernels import gemm_malleable, laswp, trsm_llu
from .matrix import PivotVector
from .pool import (MERGED, PF, RU, CompletionFlag, TeamContext, WorkerPool,
                   checkpoint_merge, serial_context, signal_complete)


@dataclass
class LuResult:
    """Outcome of a factorization; the factors live in the input matrix."""

    ipiv: PivotVector
    cols_factored: int
    singular: bool = False
    et_events: int = 0
    et_widths: tuple[int, ...] = ()


@njit(cache=True, nogil=True)
def _unb_pivoted(a, piv):  # pragma: no cover - jit
    m, n = a.shape
    info = 0
    for j in range(n):
        p = j
        best = abs(a[j, j])
        for i in range(j + 1, m):
            v = abs(a[i, j])
            if v > best:
                best = v
                p = i
        piv[j] = p
        if best == 0.0:
            info = 1
            continue
        if p != j:
            for t in range(n):
                tmp = a[j, t]
                a[j, t] = a[p, t]
                a[p, t] = tmp
        alpha = a[j, j]
        for i in range(j + 1, m):
            a[i, j] = a[i, j] / alpha
        for t in range(j + 1, n):
            v = a[j, t]
            for i in range(j + 1, m):
                a[i, t] = a[i, t] - a[i, j] * v
    return info


def _check_tall(a: np.ndarray) -> tuple[int, int]:
    m, n = a.shape
    if m < n:
        raise ValueError(f"need m >= n, got {m} x {n}")
    return m, n


def _shared_ipiv(team: TeamContext, ipiv, n: int) -> np.ndarray:
    """One pivot array visible to every member; per-member copies would
    desynchronize the laswp calls that read it."""
    if ipiv is None:
        return team.collective(lambda: np.empty(n, dtype=np.int64))
    ipiv = np.asarray(ipiv)
    if ipiv.dtype != np.int64 or ipiv.ndim != 1 or ipiv.shape[0] < n:
        raise ValueError("ipiv must be a 1-d int64 array of length >= n")
    return ipiv


def _rebase(piv: np.ndarray, offset: int) -> None:
    piv += offset


def lu_unb(a: np.ndarray, ipiv: np.ndarray | None = None) -> LuResult:
    """Unblocked right-looking LU with partial pivoting; single worker."""
    m, n = _check_tall(a)
    if ipiv is None:
        ipiv = np.empty(n, dtype=np.int64)
    info = _unb_pivoted(a, ipiv[:n]) if n else 0
    return LuResult(PivotVector(ipiv[:n].copy()), n, bool(info))


def lu_blk_rl(a: np.ndarray, b: int, ipiv: np.ndarray | None = None,
              team: TeamContext | None = None, cfg: CacheConfig | None = None,
              inner_b: int | None = None) -> LuResult:
    """Right-looking blocked LU: panel, pivots left and right, trsm, gemm.

    Panels factor via lu_unb, or via one level of blocked recursion when
    inner_b is given. Collective over team.
    """
    m, n = _check_tall(a)
    if b < 1:
        raise ValueError("block size must be >= 1")
    team = team or serial_context()
    cfg = cfg or CacheConfig.from_env()
    ipiv = _shared_ipiv(team, ipiv, n)
    singular = False
    for j in range(0, n, b):
        w = min(b, n - j)
        panel = a[j:m, j:j + w]
        piv_view = ipiv[j:j + w]
        if inner_b is not None and inner_b < w:
            sub = lu_blk_rl(panel, inner_b, ipiv=piv_view, team=team, cfg=cfg)
            singular = singular or sub.singular
        else:
            info = team.collective(lambda p=panel, pv=piv_view: _unb_pivoted(p, pv))
            singular = singular or bool(info)
        laswp(a[j:m, :j], piv_view, team)
        laswp(a[j:m, j + w:n], piv_view, team)
        team.collective(lambda pv=piv_view, off=j: _rebase(pv, off))
        trsm_llu(a[j:j + w, j:j + w], a[j:j + w, j + w:n], team)
        gemm_malleable(a[j + w:m, j + w:n], a[j + w:m, j:j + w],
                       a[j:j + w, j + w:n], 1.0, -1.0, cfg, team)
    return LuResult(PivotVector(ipiv[:n].copy()), n, singular)


def lu_blk_ll(a: np.ndarray, b: int, ipiv: np.ndarray | None = None,
              stop: CompletionFlag | None = None,
              team: TeamContext | None = None,
              cfg: CacheConfig | None = None) -> LuResult:
    """Left-looking blocked LU; optionally stoppable between block steps.

    Each step pulls the pending interchanges into the incoming block
    column, solves against the factored triangle, updates with one gemm,
    factors the block, and propagates its interchanges left. When `stop`
    is given it is polled once per step, after the block completes; on a
    set flag the accumulated interchanges are applied to the untouched
    columns on the right and cols_factored reports the early cut (always
    a positive multiple of b except possibly the last block).
    """
    m, n = _check_tall(a)
    if b < 1:
        raise ValueError("block size must be >= 1")
    team = team or serial_context()
    cfg = cfg or CacheConfig.from_env()
    ipiv = _shared_ipiv(team, ipiv, n)
    singular = False
    j = 0
    while j < n:
        w = min(b, n - j)
        if j > 0:
            laswp(a[:, j:j + w], ipiv[:j], team)
            trsm_llu(a[:j, :j], a[:j, j:j + w], team)
            gemm_malleable(a[j:m, j:j + w], a[j:m, :j], a[:j, j:j + w],
                           1.0, -1.0, cfg, team)
        block = a[j:m, j:j + w]
        piv_view = ipiv[j:j + w]
        info = team.collective(lambda blk=block, pv=piv_view: _unb_pivoted(blk, pv))
        singular = singular or bool(info)
        if j > 0:
            laswp(a[j:m, :j], piv_view, team)
        team.collective(lambda pv=piv_view, off=j: _rebase(pv, off))
        j += w
        if stop is not None and j < n and team.collective(stop.is_set):
            laswp(a[:, j:n], ipiv[:j], team)
            return LuResult(PivotVector(ipiv[:j].copy()), j, singular)
    return LuResult(PivotVector(ipiv[:n].copy()), n, singular)


# -- look-ahead driver --------------------------------------------------------

def _column_chunks(ncols: int, q: int) -> list[tuple[int, int]]:
    """q contiguous column ranges covering [0, ncols); sizes differ by <= 1."""
    base, extra = divmod(ncols, q)
    chunks = []
    lo = 0
    for i in range(q):
        hi = lo + base + (1 if i < extra else 0)
        chunks.append((lo, hi))
        lo = hi
    return chunks


def lu_la(a: np.ndarray, policy: Policy, pool: WorkerPool,
          cfg: CacheConfig | None = None) -> LuResult:
    """Factor A in place under the given policy, using the pool's teams.

    All variants perform identical arithmetic on identical values (the
    remainder split partitions columns only), so everything except lu_et
    is bitwise-reproducible against plain lu; lu_et may cut panels early
    and therefore schedules different block widths.
    """
    m, n = _check_tall(a)
    cfg = cfg or CacheConfig.from_env()
    variant = policy.variant
    b_o, b_i = policy.b.b_outer, policy.b.b_inner
    if variant != "lu":
        if pool.t < 2 or not 1 <= policy.t_pf < pool.t:
            raise ValueError(
                f"policy/pool mismatch: {variant} needs 1 <= t_pf < t, "
                f"got t_pf={policy.t_pf}, t={pool.t}")
    if n == 0:
        return LuResult(PivotVector(np.empty(0, dtype=np.int64)), 0, False)

    ipiv_global = np.empty(n, dtype=np.int64)
    singular = False
    et_events = 0
    et_widths: list[int] = []
    cell: dict[str, LuResult] = {}

    # First panel: the whole pool, before any look-ahead split exists.
    w0 = min(b_o, n)

    def prologue(ctx: TeamContext) -> None:
        with ctx.panel_scope():
            res = lu_blk_ll(a[:, :w0], b_i, team=ctx, cfg=cfg)
        if ctx.worker_id == 0:
            cell["panel"] = res

    pool.run_all(prologue, iter_index=0)
    res = cell["panel"]
    singular = res.singular
    ipiv_global[:w0] = res.ipiv.ipiv
    piv_prev = res.ipiv.ipiv
    q0, q1 = 0, w0
    pend = w0  # right edge of the last panel's scheduled columns
    b_target = b_o
    it = 0

    while q1 < n:
        it += 1
        w = min(b_target, n - q1)

        # Interchanges of the block factored last iteration reach the rest
        # of the matrix here, before the teams split. Columns between the
        # factored edge and the panel's scheduled edge already got them
        # (an ET cut swaps the leftover panel columns before returning).
        def sync_task(ctx: TeamContext, lo=q0, hi=pend, piv=piv_prev) -> None:
            laswp(a[lo:m, :lo], piv, ctx)
            laswp(a[lo:m, hi:n], piv, ctx)

        pool.run_all(sync_task, iter_index=it)

        a11 = a[q0:q1, q0:q1]
        a21 = a[q1:m, q0:q1]
        if variant == "lu":
            def whole_task(ctx: TeamContext, lo=q0, hi=q1, w=w) -> None:
                trsm_llu(a11, a[lo:hi, hi:n], ctx)
                gemm_malleable(a[hi:m, hi:n], a21, a[lo:hi, hi:n],
                               1.0, -1.0, cfg, ctx)
                with ctx.panel_scope():
                    r = lu_blk_ll(a[hi:m, hi:hi + w], b_i, team=ctx, cfg=cfg)
                if ctx.worker_id == 0:
                    cell["panel"] = r

            pool.run_all(whole_task, iter_index=it)
        else:
            a12p = a[q0:q1, q1:q1 + w]
            a22p = a[q1:m, q1:q1 + w]
            a12r = a[q0:q1, q1 + w:n]
            a22r = a[q1:m, q1 + w:n]
            pf_done = CompletionFlag(PF)
            ru_done = CompletionFlag(RU) if variant == "lu_et" else None
            ru_lead = policy.t_pf  # lowest RU worker id, stable across merges

            def pf_task(ctx: TeamContext) -> None:
                trsm_llu(a11, a12p, ctx)
                gemm_malleable(a22p, a21, a12p, 1.0, -1.0, cfg, ctx)
                with ctx.panel_scope():
                    r = lu_blk_ll(a22p, b_i, stop=ru_done, team=ctx, cfg=cfg)
                if ctx.worker_id == 0:
                    cell["panel"] = r
                    signal_complete(pf_done)

            def ru_task(ctx: TeamContext) -> None:
                trsm_llu(a11, a12r, ctx)
                if variant == "lu_ws_static":
                    chunks = _column_chunks(a22r.shape[1], policy.q)

                    def run_chunks(c2: TeamContext, start: int) -> None:
                        for qi in range(start, len(chunks)):
                            if c2.team.id != MERGED:
                                checkpoint_merge(
                                    c2, pf_done,
                                    lambda nctx, _qi=qi: run_chunks(nctx, _qi))
                            lo2, hi2 = chunks[qi]
                            gemm_malleable(a22r[:, lo2:hi2], a21,
                                           a12r[:, lo2:hi2], 1.0, -1.0,
                                           cfg, c2)

                    run_chunks(ctx, 0)
                else:
                    ru_flag = pf_done if variant in ("lu_mb", "lu_et") else None
                    gemm_malleable(a22r, a21, a12r, 1.0, -1.0, cfg, ctx,
                                   flag=ru_flag)
                if ru_done is not None and ctx.worker_id == ru_lead:
                    signal_complete(ru_done)

            pool.run_two_tasks(policy.t_pf, pf_task, ru_task, iter_index=it)

        res = cell["panel"]
        k_new = res.cols_factored
        singular = singular or res.singular
        ipiv_global[q1:q1 + k_new] = q1 + res.ipiv.ipiv
        if k_new < w:
            et_events += 1
            et_widths.append(k_new)
            b_target = max(b_i, k_new)
        else:
            b_target = min(b_o, 2 * b_target)
        piv_prev = res.ipiv.ipiv
        pend = q1 + w
        q0, q1 = q1, q1 + k_new

    # The last block's interchanges still owe the columns to its left.
    def final_sync(ctx: TeamContext, lo=q0, piv=piv_prev) -> None:
        laswp(a[lo:m, :lo], piv, ctx)

    pool.run_all(final_sync, iter_index=it + 1)
    return LuResult(PivotVector(ipiv_global), n, singular, et_events,
                    tuple(et_widths))
