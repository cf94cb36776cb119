"""Benchmark CLI: factorization timings, sweeps, and the multiply curve.

Writes one CSV record per run to stdout. GFLOPS always uses the model
count flops_lu(n, n) = 2n^3/3 regardless of variant, so variants are
directly comparable; the wall clock covers the factorization call only
(matrix generation, warmup and checking excluded). A small warmup
factorization runs first so compiled-kernel build time never lands in a
measurement.

--gepp benchmarks the panel-shaped multiply C += A*B with m = n fixed
and k swept (reuse --sweep-b lo:hi:step to choose the k values).
"""
from __future__ import annotations

import argparse
import csv
import sys
import time
from dataclasses import dataclass

import numpy as np

from .config import BlockConfig, CacheConfig, Policy, VARIANTS, threads_from_env
from .costmodel import flops_lu
from .kernels import gemm_malleable
from .lu import lu_la
from .matrix import alloc_matrix, fill_random, residual_lu, split_lu
from .pool import WorkerPool
from .trace import Tracer

RESIDUAL_TOL_FACTOR = 100.0  # residual_lu <= n * 100 * eps

CSV_FIELDS = ("variant", "n", "b_outer", "b_inner", "threads", "t_pf", "seed",
              "wall_seconds", "gflops", "residual", "et_events")


@dataclass
class BenchRecord:
    variant: str
    n: int
    b_outer: int
    b_inner: int
    threads: int
    t_pf: int
    seed: int
    wall_seconds: float
    gflops: float
    residual: float | None
    et_events: int

    def row(self) -> list[str]:
        return [
            self.variant, str(self.n), str(self.b_outer), str(self.b_inner),
            str(self.threads), str(self.t_pf), str(self.seed),
            f"{self.wall_seconds:.6f}", f"{self.gflops:.4f}",
            "" if self.residual is None else f"{self.residual:.17g}",
            str(self.et_events),
        ]


def _span(text: str) -> list[int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected lo:hi:step")
    try:
        lo, hi, step = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError("expected lo:hi:step") from None
    if lo < 1 or hi < lo or step < 1:
        raise argparse.ArgumentTypeError("need 1 <= lo <= hi and step >= 1")
    return list(range(lo, hi + 1, step))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mla-bench",
        description="Time LU variants (CSV to stdout) or the gepp multiply curve.")
    ap.add_argument("--algo", choices=VARIANTS, default="lu")
    ap.add_argument("--n", type=int, help="matrix order (required unless --sweep-n)")
    ap.add_argument("--b-outer", type=int, default=256)
    ap.add_argument("--b-inner", type=int, default=32)
    ap.add_argument("--threads", type=int,
                    help="pool size (default: MLA_THREADS, else CPU count)")
    ap.add_argument("--t-pf", type=int, default=1)
    ap.add_argument("--q", type=int, default=4,
                    help="static split count for lu_ws_static")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--check", action="store_true",
                    help="report backward error and gate the exit code on it")
    ap.add_argument("--trace", metavar="PATH",
                    help="write a JSON-lines execution trace")
    ap.add_argument("--sweep-b", type=_span, metavar="lo:hi:step",
                    help="sweep b_outer (or k values under --gepp)")
    ap.add_argument("--sweep-n", type=_span, metavar="lo:hi:step",
                    help="sweep the matrix order")
    ap.add_argument("--gepp", action="store_true",
                    help="benchmark the multiply with m=n fixed, k swept")
    return ap


def _warmup(pool: WorkerPool, variant: str, q: int) -> None:
    n = 96
    a = alloc_matrix(n, n)
    fill_random(a, 7)
    policy = Policy(variant, BlockConfig(32, 16), t_pf=1, q=q)
    lu_la(a, policy, pool)


def run_factorizations(args, pool: WorkerPool, writer) -> int:
    ns = args.sweep_n if args.sweep_n else [args.n]
    bs = args.sweep_b if args.sweep_b else [args.b_outer]
    eps = float(np.finfo(np.float64).eps)
    worst = 0
    _warmup(pool, args.algo, args.q)
    for n in ns:
        for b_outer in bs:
            b_inner = min(args.b_inner, b_outer)
            policy = Policy(args.algo, BlockConfig(b_outer, b_inner),
                            t_pf=args.t_pf, q=args.q)
            a = alloc_matrix(n, n)
            fill_random(a, args.seed)
            a0 = np.array(a, order="F", copy=True) if args.check else None
            t0 = time.perf_counter()
            result = lu_la(a, policy, pool)
            wall = time.perf_counter() - t0
            residual = None
            if args.check:
                lower, upper = split_lu(a)
                residual = residual_lu(a0, lower, upper, result.ipiv)
                if not residual <= n * RESIDUAL_TOL_FACTOR * eps:
                    worst = 1
            rec = BenchRecord(args.algo, n, b_outer, b_inner, pool.t,
                              args.t_pf, args.seed, wall,
                              flops_lu(n, n) / wall / 1e9, residual,
                              result.et_events)
            writer.writerow(rec.row())
            sys.stdout.flush()
    return worst


def run_gepp(args, pool: WorkerPool, writer) -> int:
    n = args.n
    ks = args.sweep_b if args.sweep_b else list(range(16, 257, 16))
    cfg = CacheConfig.from_env()
    a = alloc_matrix(n, max(ks))
    b = alloc_matrix(max(ks), n)
    c = alloc_matrix(n, n)
    fill_random(a, args.seed)
    fill_random(b, args.seed + 1)
    fill_random(c, args.seed + 2)
    def gemm(kk: int) -> None:
        pool.run_all(
            lambda ctx: gemm_malleable(c, a[:, :kk], b[:kk, :], 1.0, 1.0, cfg, ctx))

    gemm(min(8, max(ks)))  # warmup: compile and fault-in buffers
    for k in ks:
        t0 = time.perf_counter()
        gemm(k)
        wall = time.perf_counter() - t0
        writer.writerow([str(k), f"{2.0 * n * n * k / wall / 1e9:.4f}"])
        sys.stdout.flush()
    return 0


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.n is None and not args.sweep_n:
        ap.error("--n is required unless --sweep-n is given")
    if args.gepp and args.n is None:
        ap.error("--gepp needs --n")
    threads = args.threads if args.threads is not None else threads_from_env()
    if threads < 1:
        ap.error("--threads must be >= 1")
    if args.algo != "lu" and not args.gepp:
        if threads < 2:
            ap.error(f"{args.algo} needs at least 2 threads")
        if not 1 <= args.t_pf < threads:
            ap.error("need 1 <= t_pf < threads")
    if args.b_inner < 1 or args.b_outer < 1:
        ap.error("block sizes must be >= 1")
    if args.b_inner > args.b_outer:
        ap.error("need b_inner <= b_outer")

    tracer = Tracer() if args.trace else None
    writer = csv.writer(sys.stdout, lineterminator="\n")
    with WorkerPool(threads, tracer=tracer) as pool:
        if args.gepp:
            writer.writerow(["k", "gflops"])
            code = run_gepp(args, pool, writer)
        else:
            writer.writerow(list(CSV_FIELDS))
            code = run_factorizations(args, pool, writer)
    if tracer is not None:
        tracer.write_jsonl(args.trace)
    return code


if __name__ == "__main__":
    sys.exit(main())
