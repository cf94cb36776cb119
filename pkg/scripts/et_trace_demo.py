#!/usr/bin/env python3
"""Factor one matrix with early panel termination and dump the trace.

Six workers, one of them on the panel, order 2000, blocks 256/32: the
remainder team routinely finishes its update before the panel does, so
the panel gets cut between inner blocks and the next iteration starts
narrow. Prints the cut widths, the per-iteration merge counts and the
backward error, then writes the full trace as JSON lines.
"""
import argparse
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from mla.config import BlockConfig, Policy
from mla.costmodel import flops_lu
from mla.lu import lu_la
from mla.matrix import alloc_matrix, fill_random, residual_lu, split_lu
from mla.pool import WorkerPool
from mla.trace import Tracer, check_trace, iteration_spans


def main() -> int:
    ap = argparse.ArgumentParser(
        description="early-termination demo run with tracing")
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--threads", type=int, default=6)
    ap.add_argument("--b-outer", type=int, default=256)
    ap.add_argument("--b-inner", type=int, default=32)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", default="et_trace.jsonl")
    args = ap.parse_args()

    a0 = fill_random(alloc_matrix(args.n, args.n), args.seed)
    a = a0.copy(order="F")
    tracer = Tracer()
    policy = Policy("lu_et", BlockConfig(args.b_outer, args.b_inner))
    t0 = time.monotonic()
    with WorkerPool(args.threads, tracer=tracer) as pool:
        res = lu_la(a, policy, pool)
    wall = time.monotonic() - t0

    lower, upper = split_lu(a)
    print(f"n={args.n} threads={args.threads} "
          f"b=({args.b_outer},{args.b_inner}) seed={args.seed}")
    print(f"wall {wall:.3f}s  {flops_lu(args.n, args.n) / wall / 1e9:.2f} gflops")
    print(f"residual {residual_lu(a0, lower, upper, res.ipiv):.3e}")
    print(f"early cuts {res.et_events}, widths {list(res.et_widths)}")

    events = tracer.events()
    check_trace(events)
    merged: dict[int, int] = {}
    for e in events:
        if e.team == "MERGED":
            merged[e.iter_index] = merged.get(e.iter_index, 0) + 1
    print(f"iterations {len(iteration_spans(events))}, "
          f"merge events per iteration {merged}")
    tracer.write_jsonl(args.out)
    print(f"trace: {args.out} ({len(events)} events)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
