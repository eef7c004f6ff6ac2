"""Sequential, barrier-parallel and dataflow drivers.

All three drive an ``Executor``, which knows how to evaluate part of an array
for one step, finish the step (the replicated executor compares and votes
here) and commit. The drivers only decide *when* each piece runs.
"""
from __future__ import annotations

import csv
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from miso.analysis import build_dep_graph
from miso.core.evaluator import ReadView, eval_transition
from miso.core.kernels import Kernels
from miso.core.world import WorldState
from miso.errors import MisoRuntimeError

SEQUENTIAL = "seq"
BARRIER = "barrier"
DATAFLOW = "dataflow"


@dataclass(frozen=True)
class SchedulerKind:
    kind: str = SEQUENTIAL
    threads: int = 1

    def __post_init__(self):
        if self.kind not in (SEQUENTIAL, BARRIER, DATAFLOW):
            raise ValueError(f"unknown scheduler {self.kind!r}")
        if self.threads < 1:
            raise ValueError("thread count must be >= 1")


@dataclass
class StepTrace:
    """Commit log: (wallclock ns, array, committed step) per commit."""
    samples: list = field(default_factory=list)
    checksums: dict = field(default_factory=dict)  # (array, sigma) -> sha256
    record_checksums: bool = False
    wall_seconds: float = 0.0
    evaluations: int = 0

    def record(self, world: WorldState, array: str) -> None:
        sigma = world.sigma[array]
        self.samples.append((time.perf_counter_ns(), array, sigma))
        if self.record_checksums:
            self.checksums[(array, sigma)] = world.checksum([array])

    def series(self, array: str) -> list[tuple[int, int]]:
        return [(t, s) for t, a, s in self.samples if a == array]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["wallclock_ns", "arrayId", "sigma"])
            w.writerows(self.samples)


def failure_key(program, exc) -> tuple:
    order = program.array(exc.array).index if exc.array is not None else -1
    return (exc.step or 0, order, exc.index if exc.index is not None else -1)


class Executor:
    """Unreplicated execution. ``scalar`` selects the per-instance evaluator."""

    def __init__(self, program, world: WorldState, scalar: bool = False):
        self.program = program
        self.world = world
        self.scalar = scalar
        self.kernels = None if scalar else Kernels(program)

    def units(self, array: str, step: int, parts: int) -> list[Callable[[], None]]:
        """Independent closures that together compute step ``step + 1`` of ``array``."""
        out = self.world[array].scratch
        return [self._unit(ReadView(self.world, step), array, lo, hi, out)
                for lo, hi in chunk_bounds(self.world[array].size, parts)]

    def _unit(self, view, array, lo, hi, out):
        if self.scalar:
            program = self.program

            def run():
                for i in range(lo, hi):
                    for f, v in eval_transition(program, view, array, i).items():
                        out[f][i] = v
            return run
        kernels = self.kernels
        return lambda: kernels.evaluate(view, array, lo, hi, out)

    def complete(self, array: str, step: int) -> None:
        """Post-evaluation phase, before commit (no-op without replication)."""

    def commit(self, array: str) -> None:
        self.world.commit(array)


def chunk_bounds(size: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, size))
    return [(size * k // parts, size * (k + 1) // parts) for k in range(parts)]


def _start_step(world: WorldState) -> int:
    steps = set(world.sigma.values())
    if len(steps) > 1:
        raise ValueError(f"arrays are not at a common step: {world.sigma}")
    return steps.pop() if steps else 0


def run_sequential(program, world: WorldState, steps: int, *, executor=None,
                   trace: StepTrace | None = None, on_commit=None,
                   before_step=None) -> WorldState:
    """Reference driver: arrays in declaration order, instances in index order."""
    executor = executor or Executor(program, world, scalar=True)
    return _lockstep(program, world, steps, executor, None, trace, on_commit, before_step)


def run_barrier_parallel(program, world: WorldState, steps: int, threads: int, *,
                         executor=None, trace: StepTrace | None = None,
                         on_commit=None, before_step=None) -> WorldState:
    """Every step: all arrays chunked across ``threads`` workers, then one barrier."""
    if threads < 1:
        raise ValueError("thread count must be >= 1")
    executor = executor or Executor(program, world)
    if threads == 1:
        return _lockstep(program, world, steps, executor, None, trace, on_commit, before_step)
    with ThreadPoolExecutor(threads, thread_name_prefix="miso-barrier") as pool:
        return _lockstep(program, world, steps, executor, pool, trace, on_commit,
                         before_step, parts=threads)


def _lockstep(program, world, steps, executor, pool, trace, on_commit, before_step,
              parts: int = 1) -> WorldState:
    if steps < 0:
        raise ValueError("step count must be >= 0")
    trace = trace if trace is not None else StepTrace()
    start = _start_step(world)
    names = program.array_names
    t0 = time.perf_counter()
    for s in range(start, start + steps):
        failures = []
        units = []
        for a in names:
            if before_step is not None:
                before_step(a, s + 1)
            units.extend(executor.units(a, s, parts))
        if pool is None:
            for u in units:
                try:
                    u()
                except MisoRuntimeError as exc:
                    failures.append(exc)
                    break
        else:
            for fut in [pool.submit(u) for u in units]:
                exc = fut.exception()
                if exc is not None:
                    if not isinstance(exc, MisoRuntimeError):
                        raise exc
                    failures.append(exc)
        if not failures:
            for a in names:
                try:
                    executor.complete(a, s)
                except MisoRuntimeError as exc:
                    failures.append(exc)
        if failures:
            raise min(failures, key=lambda e: failure_key(program, e))
        for a in names:
            executor.commit(a)
            trace.record(world, a)
            if on_commit is not None:
                on_commit(world, a)
        trace.evaluations += sum(world[a].size for a in names)
    trace.wall_seconds += time.perf_counter() - t0
    return world


def run_dataflow(program, world: WorldState, steps: int, threads: int, *,
                 executor=None, trace: StepTrace | None = None, on_commit=None,
                 before_step=None, graph=None) -> WorldState:
    """Barrier-free driver.

    Array A may compute step sigma(A)+1 once every neighbour X in the
    undirected read graph has sigma(X) >= sigma(A). With two banks per array
    this keeps every needed bank alive and bounds neighbour skew to one step.
    """
    if steps < 0:
        raise ValueError("step count must be >= 0")
    if threads < 1:
        raise ValueError("thread count must be >= 1")
    executor = executor or Executor(program, world)
    trace = trace if trace is not None else StepTrace()
    graph = graph or build_dep_graph(program)
    names = program.array_names
    nbrs = {a: graph.neighbors(a) - {a} for a in names}
    start = _start_step(world)
    sigma = world.sigma
    limit = start + steps
    running: set[str] = set()
    halted: set[str] = set()
    failures: list = []
    cond = threading.Condition()

    def eligible(a: str) -> bool:
        return (a not in running and a not in halted and sigma[a] < limit
                and all(sigma[x] >= sigma[a] for x in nbrs[a]))

    def task(a: str, s: int) -> None:
        nonlocal limit
        err = None
        try:
            if before_step is not None:
                before_step(a, s + 1)
            for u in executor.units(a, s, 1):
                u()
            executor.complete(a, s)
        except MisoRuntimeError as exc:
            err = exc
        except BaseException as exc:  # internal failure: stop everything
            err = exc
        with cond:
            running.discard(a)
            if err is None:
                executor.commit(a)
                trace.record(world, a)
                trace.evaluations += world[a].size
                if on_commit is not None:
                    on_commit(world, a)
            else:
                halted.add(a)
                failures.append(err)
                if isinstance(err, MisoRuntimeError):
                    # keep going up to the failing step so the reported error
                    # is the earliest one, whatever the interleaving
                    limit = min(limit, s + 1)
                else:
                    limit = min(limit, start)
            cond.notify_all()

    t0 = time.perf_counter()
    with ThreadPoolExecutor(threads, thread_name_prefix="miso-dataflow") as pool:
        while True:
            with cond:
                while True:
                    ready = [a for a in names if eligible(a)]
                    if ready or not running:
                        break
                    cond.wait()
                if not ready:
                    break
                for a in ready:
                    running.add(a)
                    pool.submit(task, a, sigma[a])
    trace.wall_seconds += time.perf_counter() - t0

    internal = [e for e in failures if not isinstance(e, MisoRuntimeError)]
    if internal:
        raise internal[0]
    if failures:
        raise min(failures, key=lambda e: failure_key(program, e))
    stuck = [a for a in names if sigma[a] < limit]
    if stuck:
        raise RuntimeError(f"dataflow scheduler deadlocked with {stuck} behind step {limit}")
    return world


def run(program, world: WorldState, steps: int, scheduler: SchedulerKind, **kw) -> WorldState:
    if scheduler.kind == SEQUENTIAL:
        return run_sequential(program, world, steps, **kw)
    if scheduler.kind == BARRIER:
        return run_barrier_parallel(program, world, steps, scheduler.threads, **kw)
    return run_dataflow(program, world, steps, scheduler.threads, **kw)


def dataflow_eligible(sigma: dict, nbrs: dict, limit: int) -> list[str]:
    """The eligibility predicate on its own, for property tests."""
    return [a for a in sigma if sigma[a] < limit
            and all(sigma[x] >= sigma[a] for x in nbrs[a] if x != a)]
