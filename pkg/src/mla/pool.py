"""Worker pool with named thread teams and a worker-sharing merge protocol.

Execution model: a kernel call is collective. Every member of a team
enters it with identical arguments, divides the work internally by rank,
and meets the others at barriers. Team membership is frozen while a
kernel computes; it can only change at declared entry points, through
checkpoint_merge.

A team that finishes its task parks its workers in the iteration's dock.
When the other team reaches an entry point and finds the shared
CompletionFlag set, the parked workers are absorbed into an enlarged
MERGED team: they wake, adopt the new team, and run the resume closure,
which must re-enter the in-flight kernel at that same entry point. Teams
only ever grow; the configured split is restored at the next dispatch.
"""
from __future__ import annotations

import os
import threading
from typing import Callable

PF = "PF"
RU = "RU"
MERGED = "MERGED"
ALL = "ALL"


class CompletionFlag:
    """One-shot done signal: a single writer team, wait-free readers."""

    __slots__ = ("_event", "writer")

    def __init__(self, writer: str | None = None) -> None:
        self._event = threading.Event()
        self.writer = writer

    def is_set(self) -> bool:
        return self._event.is_set()

    def set(self) -> None:
        self._event.set()

    def __repr__(self) -> str:  # pragma: no cover
        return f"CompletionFlag(writer={self.writer!r}, set={self.is_set()})"


def signal_complete(flag: CompletionFlag) -> None:
    """Mark the writing team's task complete; idempotent."""
    flag.set()


class Team:
    """Shared handle for one set of workers executing a task collectively."""

    __slots__ = ("id", "members", "epoch", "barrier", "next", "_slot")

    def __init__(self, team_id: str, members, epoch: int = 0) -> None:
        self.id = team_id
        self.members = tuple(sorted(members))
        if not self.members:
            raise ValueError("a team needs at least one member")
        self.epoch = epoch
        self.barrier = threading.Barrier(len(self.members))
        self.next: "Team | None" = None  # decision slot for checkpoint_merge
        self._slot = None                # broadcast slot for collective()

    @property
    def size(self) -> int:
        return len(self.members)

    def __repr__(self) -> str:  # pragma: no cover
        return f"Team({self.id}, members={self.members}, epoch={self.epoch})"


class _NullSpan:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


_NULL_SPAN = _NullSpan()


class _Span:
    """Times one kernel section and records it under the current team id."""

    __slots__ = ("ctx", "task", "t0")

    def __init__(self, ctx: "TeamContext", task: str) -> None:
        self.ctx = ctx
        self.task = task

    def __enter__(self):
        self.t0 = self.ctx.tracer.now()
        return self

    def __exit__(self, *exc):
        ctx = self.ctx
        ctx.tracer.add(ctx.worker_id, ctx.team.id, self.task,
                       self.t0, ctx.tracer.now(), ctx.iter_index)
        return False


class _PanelSpan:
    """PANEL section; kernel events nested inside it are suppressed."""

    __slots__ = ("ctx", "t0")

    def __init__(self, ctx: "TeamContext") -> None:
        self.ctx = ctx

    def __enter__(self):
        self.ctx._panel_depth += 1
        if self.ctx.tracer is not None:
            self.t0 = self.ctx.tracer.now()
        return self

    def __exit__(self, *exc):
        ctx = self.ctx
        ctx._panel_depth -= 1
        if ctx.tracer is not None:
            ctx.tracer.add(ctx.worker_id, ctx.team.id, "PANEL",
                           self.t0, ctx.tracer.now(), ctx.iter_index)
        return False


class TeamContext:
    """One worker's view of its current team during a dispatched task."""

    __slots__ = ("pool", "worker_id", "team", "tracer", "iter_index", "job",
                 "_panel_depth")

    def __init__(self, pool, worker_id: int, team: Team, tracer=None,
                 iter_index: int = 0) -> None:
        self.pool = pool
        self.worker_id = worker_id
        self.team = team
        self.tracer = tracer
        self.iter_index = iter_index
        self.job = None
        self._panel_depth = 0

    @property
    def rank(self) -> int:
        return self.team.members.index(self.worker_id)

    @property
    def size(self) -> int:
        return self.team.size

    @property
    def is_coordinator(self) -> bool:
        return self.team.members[0] == self.worker_id

    def barrier(self) -> None:
        self.team.barrier.wait()

    def collective(self, factory: Callable[[], object]):
        """Coordinator runs factory(); every member returns the same value.

        This is also how shared per-kernel state (pivot arrays, packing
        buffers) is allocated exactly once and seen by all members.
        """
        team = self.team
        team.barrier.wait()
        if team.members[0] == self.worker_id:
            team._slot = factory()
        team.barrier.wait()
        return team._slot

    def traced(self, task: str):
        if self.tracer is None or (self._panel_depth and task != "PANEL"):
            return _NULL_SPAN
        return _Span(self, task)

    def panel_scope(self):
        return _PanelSpan(self)


def serial_context(tracer=None) -> TeamContext:
    """Single-worker context for running collective kernels sequentially."""
    return TeamContext(None, 0, Team(ALL, (0,)), tracer, 0)


class _Job:
    """Bookkeeping for one dispatch onto the pool: quiesce counts and dock."""

    __slots__ = ("gen", "assignments", "home", "lock", "task_returned",
                 "team_sizes", "docked", "absorb", "resumes_active",
                 "closing", "exited", "errors")

    def __init__(self, gen: int, assignments: dict) -> None:
        self.gen = gen
        self.assignments = assignments
        self.home = {w: ctx.team.id for w, (ctx, _) in assignments.items()}
        self.lock = threading.Condition()
        self.task_returned: dict[str, int] = {}
        self.team_sizes: dict[str, int] = {}
        for _, (ctx, _task) in assignments.items():
            self.task_returned.setdefault(ctx.team.id, 0)
            self.team_sizes[ctx.team.id] = ctx.team.size
        self.docked: set[int] = set()
        self.absorb: dict[int, tuple] = {}
        self.resumes_active = 0
        self.closing = False
        self.exited = 0
        self.errors: list[tuple[int, BaseException]] = []

    def donatable_workers(self, team: Team) -> tuple[int, ...] | None:
        """Parked members of the other team, if it has fully quiesced."""
        others = [tid for tid in self.team_sizes if tid != team.id]
        if len(others) != 1:
            return None
        tid = others[0]
        with self.lock:
            if self.task_returned[tid] != self.team_sizes[tid]:
                return None
            donors = tuple(w for w, home in self.home.items() if home == tid)
            if any(w not in self.docked for w in donors):
                return None
        return donors


class WorkerPool:
    """Fixed set of worker threads dispatched as one or two teams.

    Pool size comes from the argument, else MLA_THREADS, else the CPU
    count. Workers are plain daemon threads; shutdown() (or the context
    manager) retires them.
    """

    def __init__(self, t: int | None = None, tracer=None) -> None:
        if t is None:
            from .config import threads_from_env
            t = threads_from_env()
        if t < 1:
            raise ValueError("pool needs at least one worker")
        self.t = t
        self.tracer = tracer
        self._gen = 0
        self._job: _Job | None = None
        self._lock = threading.Condition()
        self._shutdown = False
        self._threads = [
            threading.Thread(target=self._worker_loop, args=(w,),
                             name=f"mla-worker-{w}", daemon=True)
            for w in range(t)
        ]
        for th in self._threads:
            th.start()

    # -- lifecycle -----------------------------------------------------

    def shutdown(self) -> None:
        with self._lock:
            if self._shutdown:
                return
            self._shutdown = True
            self._lock.notify_all()
        for th in self._threads:
            th.join()

    def __enter__(self) -> "WorkerPool":
        return self

    def __exit__(self, *exc) -> None:
        self.shutdown()

    # -- dispatch ------------------------------------------------------

    def run_all(self, task: Callable[[TeamContext], None], iter_index: int = 0,
                team_id: str = ALL) -> None:
        """Run one task collectively on all workers as a single team."""
        team = Team(team_id, range(self.t))
        assignments = {
            w: (TeamContext(self, w, team, self.tracer, iter_index), task)
            for w in range(self.t)
        }
        self._dispatch(assignments)

    def run_two_tasks(self, t_pf: int, task_pf: Callable[[TeamContext], None],
                      task_ru: Callable[[TeamContext], None],
                      iter_index: int = 0) -> None:
        """Run task_pf on workers [0, t_pf) and task_ru on the rest.

        Raises ValueError unless 1 <= t_pf < pool size; teams are created
        fresh, so a merge in one dispatch never leaks into the next.
        """
        if not 1 <= t_pf < self.t:
            raise ValueError(f"need 1 <= t_pf < t, got t_pf={t_pf} with t={self.t}")
        team_pf = Team(PF, range(t_pf))
        team_ru = Team(RU, range(t_pf, self.t))
        assignments = {}
        for w in range(self.t):
            team = team_pf if w < t_pf else team_ru
            task = task_pf if w < t_pf else task_ru
            assignments[w] = (TeamContext(self, w, team, self.tracer, iter_index), task)
        self._dispatch(assignments)

    def _dispatch(self, assignments: dict) -> None:
        if self._shutdown:
            raise RuntimeError("pool is shut down")
        self._gen += 1
        job = _Job(self._gen, assignments)
        for _, (ctx, _task) in assignments.items():
            ctx.job = job
        with self._lock:
            self._job = job
            self._lock.notify_all()
        with job.lock:
            while not (job.resumes_active == 0 and not job.absorb and all(
                    job.task_returned[tid] == size
                    for tid, size in job.team_sizes.items())):
                job.lock.wait()
            job.closing = True
            job.lock.notify_all()
            while job.exited < len(assignments):
                job.lock.wait()
        if job.errors:
            job.errors.sort(key=lambda we: we[0])
            raise job.errors[0][1]

    # -- worker side ---------------------------------------------------

    def _worker_loop(self, w: int) -> None:
        last_gen = 0
        while True:
            with self._lock:
                while not self._shutdown and (self._job is None
                                              or self._job.gen == last_gen):
                    self._lock.wait()
                if self._shutdown:
                    return
                job = self._job
                last_gen = job.gen
            self._run_assignment(job, w)

    def _run_assignment(self, job: _Job, w: int) -> None:
        ctx, task = job.assignments[w]
        try:
            task(ctx)
        except BaseException as exc:  # noqa: BLE001 - propagated to dispatcher
            with job.lock:
                job.errors.append((w, exc))
            ctx.team.barrier.abort()
        with job.lock:
            job.task_returned[job.home[w]] += 1
            job.docked.add(w)
            job.lock.notify_all()
        # Dock: park until absorbed into the other team or released.
        while True:
            with job.lock:
                while w not in job.absorb and not job.closing:
                    job.lock.wait()
                if w in job.absorb:
                    new_ctx, resume = job.absorb.pop(w)
                else:
                    job.docked.discard(w)
                    job.exited += 1
                    job.lock.notify_all()
                    return
            if resume is not None:
                try:
                    resume(new_ctx)
                except BaseException as exc:  # noqa: BLE001
                    with job.lock:
                        job.errors.append((w, exc))
                    new_ctx.team.barrier.abort()
            with job.lock:
                job.resumes_active -= 1
                job.docked.add(w)
                job.lock.notify_all()


def checkpoint_merge(team_ctx: TeamContext, flag: CompletionFlag | None,
                     resume: Callable[[TeamContext], None] | None = None) -> Team:
    """Entry-point rendezvous: absorb the finished partner team if flagged.

    Collective over the caller's team. When flag is set and every worker
    of the other team has returned from its task and parked, all of them
    join a new MERGED team (epoch + 1). Each absorbed worker wakes with a
    context for the merged team and runs resume(ctx), which must re-enter
    the caller's kernel at this same entry point so the merged team stays
    in lockstep. Returns the (possibly unchanged) team for every member;
    calls after a merge are no-ops, so polling stays cheap.
    """
    team = team_ctx.team
    if flag is None or team.id == MERGED or team_ctx.job is None:
        return team
    assert team_ctx.worker_id in team.members, "checkpoint outside the member team"
    job = team_ctx.job
    team.barrier.wait()
    if team.members[0] == team_ctx.worker_id:
        donors = job.donatable_workers(team) if flag.is_set() else None
        if donors:
            merged = Team(MERGED, team.members + donors, epoch=team.epoch + 1)
            with job.lock:
                for w in donors:
                    nctx = TeamContext(team_ctx.pool, w, merged,
                                       team_ctx.tracer, team_ctx.iter_index)
                    nctx.job = job
                    job.absorb[w] = (nctx, resume)
                    job.docked.discard(w)
                    job.resumes_active += 1
                job.lock.notify_all()
            team.next = merged
        else:
            team.next = team
    team.barrier.wait()
    new_team = team.next
    team_ctx.team = new_team
    return new_team
