"""Trace recording, serialization and offline validity checks."""
import pytest

from mla.trace import (TraceEvent, Tracer, check_trace, iteration_spans,
                       load_jsonl)


def ev(worker, team, task, t0, t1, it=0):
    return TraceEvent(worker, team, task, t0, t1, it)


def test_tracer_collects_and_sorts():
    tr = Tracer()
    tr.add(1, "RU", "GEMM", 50, 90, 0)
    tr.add(0, "PF", "TRSM", 10, 40, 0)
    tr.add(0, "PF", "PANEL", 41, 49, 0)
    events = tr.events()
    assert [e.t_start for e in events] == [10, 41, 50]
    tr.clear()
    assert tr.events() == []


def test_tracer_clock_is_monotone():
    tr = Tracer()
    a = tr.now()
    b = tr.now()
    assert 0 <= a <= b


def test_jsonl_roundtrip(tmp_path):
    tr = Tracer()
    tr.add(0, "PF", "PANEL", 0, 5, 1)
    tr.add(2, "RU", "GEMM", 3, 9, 1)
    path = tmp_path / "trace.jsonl"
    tr.write_jsonl(str(path))
    assert load_jsonl(str(path)) == tr.events()
    tr.write_jsonl(str(path), append=True)
    assert len(load_jsonl(str(path))) == 4


def test_check_trace_accepts_valid_history():
    check_trace([
        ev(0, "PF", "PANEL", 0, 10, 1),
        ev(1, "RU", "GEMM", 0, 8, 1),
        ev(1, "MERGED", "GEMM", 12, 20, 1),
        ev(0, "MERGED", "GEMM", 13, 19, 1),
    ])


def test_check_trace_rejects_unknown_task():
    with pytest.raises(ValueError):
        check_trace([ev(0, "PF", "SPIN", 0, 1)])


def test_check_trace_rejects_reversed_stamps():
    with pytest.raises(ValueError):
        check_trace([ev(0, "PF", "GEMM", 5, 2)])


def test_check_trace_rejects_worker_overlap():
    with pytest.raises(ValueError):
        check_trace([
            ev(0, "RU", "GEMM", 0, 10),
            ev(0, "RU", "TRSM", 5, 12),
        ])


def test_check_trace_requires_panel_before_merge():
    # No PF panel in that iteration at all.
    with pytest.raises(ValueError):
        check_trace([ev(1, "MERGED", "GEMM", 5, 9, 2)])
    # Panel exists but ends after the merged event starts.
    with pytest.raises(ValueError):
        check_trace([
            ev(0, "PF", "PANEL", 0, 10, 1),
            ev(1, "MERGED", "GEMM", 5, 9, 1),
        ])


def test_iteration_spans():
    spans = iteration_spans([
        ev(0, "PF", "TRSM", 5, 9, 1),
        ev(1, "RU", "GEMM", 2, 30, 1),
        ev(0, "ALL", "LASWP", 40, 44, 2),
    ])
    assert spans == {1: (2, 30), 2: (40, 44)}
