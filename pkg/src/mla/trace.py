"""Execution tracing for worker teams.

Workers append to private buffers (no locking on the hot path); events
carry monotonic nanosecond stamps relative to the tracer's origin so
traces from one run are directly comparable. Serialized as JSON lines.
"""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass

TASKS = ("PACK_A", "PACK_B", "GEMM", "TRSM", "LASWP", "PANEL", "BARRIER")


@dataclass(frozen=True)
class TraceEvent:
    worker: int
    team: str
    task: str
    t_start: int
    t_end: int
    iter_index: int


class Tracer:
    """Collects TraceEvents per worker; merge/sort happens at read time."""

    def __init__(self) -> None:
        self._origin = time.monotonic_ns()
        self._buffers: dict[int, list[TraceEvent]] = {}

    def now(self) -> int:
        return time.monotonic_ns() - self._origin

    def add(self, worker: int, team: str, task: str, t_start: int, t_end: int,
            iter_index: int) -> None:
        buf = self._buffers.setdefault(worker, [])
        buf.append(TraceEvent(worker, team, task, t_start, t_end, iter_index))

    def events(self) -> list[TraceEvent]:
        out: list[TraceEvent] = []
        for buf in self._buffers.values():
            out.extend(buf)
        out.sort(key=lambda e: (e.t_start, e.worker, e.t_end))
        return out

    def clear(self) -> None:
        self._buffers.clear()
        self._origin = time.monotonic_ns()

    def write_jsonl(self, path: str, append: bool = False) -> None:
        mode = "a" if append else "w"
        with open(path, mode, encoding="utf-8") as fh:
            for ev in self.events():
                fh.write(json.dumps(asdict(ev), separators=(",", ":")) + "\n")


def load_jsonl(path: str) -> list[TraceEvent]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(TraceEvent(**json.loads(line)))
    return out


def check_trace(events: list[TraceEvent]) -> None:
    """Validate structural trace invariants; raises ValueError on violation.

    Checks: stamps ordered within each event, per-worker events do not
    overlap, and every MERGED-team event is preceded (same outer
    iteration) by a completed PF PANEL event, since a merge can only
    consume workers the panel team released.
    """
    per_worker: dict[int, list[TraceEvent]] = {}
    for ev in events:
        if ev.task not in TASKS:
            raise ValueError(f"unknown task {ev.task!r}")
        if ev.t_end < ev.t_start:
            raise ValueError(f"event ends before it starts: {ev}")
        per_worker.setdefault(ev.worker, []).append(ev)
    for worker, evs in per_worker.items():
        evs = sorted(evs, key=lambda e: e.t_start)
        for prev, cur in zip(evs, evs[1:]):
            if cur.t_start < prev.t_end:
                raise ValueError(
                    f"worker {worker} events overlap: {prev} .. {cur}")
    panel_ends: dict[int, int] = {}
    for ev in events:
        if ev.team == "PF" and ev.task == "PANEL":
            cur = panel_ends.get(ev.iter_index)
            panel_ends[ev.iter_index] = ev.t_end if cur is None else min(cur, ev.t_end)
    for ev in events:
        if ev.team == "MERGED":
            end = panel_ends.get(ev.iter_index)
            if end is None or end > ev.t_start:
                raise ValueError(f"MERGED event with no completed PF panel before it: {ev}")


def iteration_spans(events: list[TraceEvent]) -> dict[int, tuple[int, int]]:
    """Wall-clock [start, end] per outer iteration index."""
    spans: dict[int, tuple[int, int]] = {}
    for ev in events:
        lo, hi = spans.get(ev.iter_index, (ev.t_start, ev.t_end))
        spans[ev.iter_index] = (min(lo, ev.t_start), max(hi, ev.t_end))
    return spans
