"""Malleable thread-level dense linear algebra: packed kernels whose worker
teams can grow at safe points mid-execution, and blocked LU factorizations
that exploit that to keep the panel's workers busy (look-ahead, worker
sharing, early termination)."""

from .config import BlockConfig, CacheConfig, Policy, VARIANTS
from .costmodel import (cumulative_flop_share, flops_ll_partial, flops_lu,
                        flops_panel_total, flops_rl_partial, iteration_flops)
from .kernels import (PackedBuffer, gemm_malleable, laswp, micro_kernel,
                      pack_a, pack_b, trsm_llu)
from .lu import LuResult, lu_blk_ll, lu_blk_rl, lu_la, lu_unb
from .matrix import (PivotVector, alloc_matrix, fill_random, frobenius_norm,
                     leading_dimension, partition_2x2, residual_lu, split_lu,
                     swap_rows)
from .pool import (ALL, MERGED, PF, RU, CompletionFlag, Team, TeamContext,
                   WorkerPool, checkpoint_merge, serial_context,
                   signal_complete)
from .trace import TraceEvent, Tracer, check_trace, load_jsonl

__version__ = "0.1.0"

__all__ = [
    "ALL", "BlockConfig", "CacheConfig", "CompletionFlag", "LuResult",
    "MERGED", "PF", "PackedBuffer", "PivotVector", "Policy", "RU", "Team",
    "TeamContext", "TraceEvent", "Tracer", "VARIANTS", "WorkerPool",
    "alloc_matrix", "check_trace", "checkpoint_merge", "cumulative_flop_share",
    "fill_random", "flops_ll_partial", "flops_lu", "flops_panel_total",
    "flops_rl_partial", "frobenius_norm", "gemm_malleable", "iteration_flops",
    "laswp", "leading_dimension", "load_jsonl", "lu_blk_ll", "lu_blk_rl",
    "lu_la", "lu_unb", "micro_kernel", "pack_a", "pack_b", "partition_2x2",
    "residual_lu", "serial_context", "signal_complete", "split_lu",
    "swap_rows", "trsm_llu",
]
