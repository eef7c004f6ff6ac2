"""Dual-modular-redundant execution with on-demand arbitration."""
from __future__ import annotations

import csv
import threading
from dataclasses import dataclass, field as dc_field

import numpy as np

from miso.core.evaluator import ReadView, eval_transition
from miso.core.world import CellArrayState, WorldState
from miso.depend.faults import FaultModel, inject_faults
from miso.depend.health import CellHealth
from miso.errors import MisoRuntimeError
from miso.sched import Executor, SchedulerKind, StepTrace, chunk_bounds, run

VOTED_REPLICA0 = "VotedReplica0"
VOTED_REPLICA1 = "VotedReplica1"
UNRECOVERABLE = "Unrecoverable"


class UnrecoverableMismatch(MisoRuntimeError):
    """Both replicas and the arbitration run disagree pairwise."""


@dataclass(frozen=True)
class ReplicationConfig:
    arrays: frozenset | None = None  # None means every array
    window: int = 100
    threshold: float = 0.1

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("health window must be >= 1")
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError("health threshold must be in (0, 1]")

    def replicated(self, program) -> tuple[str, ...]:
        if self.arrays is None:
            return program.array_names
        unknown = set(self.arrays) - set(program.array_names)
        if unknown:
            raise ValueError(f"cannot replicate unknown arrays: {sorted(unknown)}")
        return tuple(a for a in program.array_names if a in self.arrays)


@dataclass(frozen=True, order=True)
class MismatchRecord:
    step: int
    array_id: int
    index: int
    field_id: int
    array: str = dc_field(compare=False)
    field: str = dc_field(compare=False)
    replica0_bits: int = dc_field(compare=False)
    replica1_bits: int = dc_field(compare=False)
    resolution: str = dc_field(compare=False)


def _bits(col: np.ndarray) -> np.ndarray:
    return col.view(np.uint64)


class ReplicatedExecutor(Executor):
    """Executor that runs selected arrays twice and reconciles the results.

    Replica 0 lives in the world itself (so readers of a replicated array see
    it); replica 1 is a private copy evaluated from its own previous state.
    """

    def __init__(self, program, world: WorldState, config: ReplicationConfig,
                 faults: FaultModel | None = None, scalar: bool = False,
                 verify: bool = False):
        super().__init__(program, world, scalar)
        self.config = config
        self.faults = faults or FaultModel.none()
        self.verify = verify
        names = config.replicated(program)
        self.faults.validate(program, names)
        self.replicas: dict[str, CellArrayState] = {a: world[a].copy() for a in names}
        self.health = {a: CellHealth(world[a].size, config.window, config.threshold)
                       for a in names}
        self.records: list[MismatchRecord] = []
        self.injected: list = []
        self._lock = threading.Lock()

    def units(self, array, step, parts):
        units = super().units(array, step, parts)
        replica = self.replicas.get(array)
        if replica is None:
            return units
        view = ReadView(self.world, step, overrides={array: replica.banks[step % 2]})
        out = replica.scratch
        units.extend(self._unit(view, array, lo, hi, out)
                     for lo, hi in chunk_bounds(replica.size, parts))
        return units

    def _third(self, array: str, step: int, idx: np.ndarray) -> dict:
        view = ReadView(self.world, step)
        if self.scalar:
            cols = {f: [] for f in self.world[array].committed}
            for i in idx.tolist():
                for f, v in eval_transition(self.program, view, array, i).items():
                    cols[f].append(v)
            return {f: np.array(v, dtype=self.world[array].committed[f].dtype)
                    for f, v in cols.items()}
        return self.kernels.evaluate_at(view, array, idx)

    def complete(self, array: str, step: int) -> None:
        replica = self.replicas.get(array)
        if replica is None:
            return
        target = step + 1
        decl = self.program.array(array)
        fields = self.world[array].cell.field_names
        r0, r1 = self.world[array].scratch, replica.scratch
        applied = (inject_faults(self.faults, target, array, decl.index, 0, r0, fields)
                   + inject_faults(self.faults, target, array, decl.index, 1, r1, fields))

        differs = {f: _bits(r0[f]) != _bits(r1[f]) for f in fields}
        any_diff = np.zeros(decl.size, dtype=bool)
        for d in differs.values():
            any_diff |= d
        idx = np.flatnonzero(any_diff)
        records = []
        unrecoverable = None
        if idx.size:
            third = self._third(array, step, idx)
            for k, i in enumerate(idx.tolist()):
                for fid, f in enumerate(fields):
                    if not differs[f][i]:
                        continue
                    b0, b1 = int(_bits(r0[f])[i]), int(_bits(r1[f])[i])
                    b3 = int(third[f].view(np.uint64)[k])
                    if b3 == b0:
                        resolution = VOTED_REPLICA0
                        r1[f][i] = r0[f][i]
                    elif b3 == b1:
                        resolution = VOTED_REPLICA1
                        r0[f][i] = r1[f][i]
                    else:
                        resolution = UNRECOVERABLE
                        unrecoverable = unrecoverable or (i, f)
                    records.append(MismatchRecord(target, decl.index, i, fid, array, f,
                                                  b0, b1, resolution))
        self.health[array].update(target, any_diff)
        with self._lock:
            self.injected.extend(applied)
            self.records.extend(records)
        if unrecoverable is not None:
            i, f = unrecoverable
            raise UnrecoverableMismatch(
                f"replicas and arbitration run disagree on field '{f}'",
                array, i, target)

    def commit(self, array: str) -> None:
        super().commit(array)
        replica = self.replicas.get(array)
        if replica is None:
            return
        replica.active = 1 - replica.active
        if self.verify:
            ours, theirs = self.world[array].committed, replica.committed
            for f in ours:
                if ours[f].tobytes() != theirs[f].tobytes():
                    raise AssertionError(f"replicas of {array}.{f} diverged after repair")

    def sorted_records(self) -> list[MismatchRecord]:
        return sorted(self.records)

    def health_rows(self) -> list[tuple]:
        rows = []
        for a in self.replicas:
            h = self.health[a]
            for i in range(len(h.total)):
                rows.append((a, i, int(h.total[i]), h.window, bool(h.flagged[i])))
        return rows

    def flagged(self) -> list[tuple[str, int]]:
        return [(a, i) for a, i, _, _, flag in self.health_rows() if flag]


@dataclass
class ReplicatedRun:
    world: WorldState
    records: list
    health: list
    injected: list
    executor: ReplicatedExecutor
    trace: StepTrace


def run_replicated(program, world: WorldState, steps: int, config: ReplicationConfig,
                   faults: FaultModel | None = None,
                   scheduler: SchedulerKind = SchedulerKind(), *, verify: bool = False,
                   trace: StepTrace | None = None, on_commit=None,
                   before_step=None) -> ReplicatedRun:
    """Drive ``steps`` steps with DMR on the configured arrays.

    Raises UnrecoverableMismatch (after recording it) when arbitration fails;
    the partial log stays available on ``exc.executor``.
    """
    executor = ReplicatedExecutor(program, world, config, faults,
                                  scalar=scheduler.kind == "seq", verify=verify)
    trace = trace if trace is not None else StepTrace()
    try:
        run(program, world, steps, scheduler, executor=executor, trace=trace,
            on_commit=on_commit, before_step=before_step)
    except MisoRuntimeError as exc:
        exc.executor = executor
        raise
    return ReplicatedRun(world, executor.sorted_records(), executor.health_rows(),
                         sorted(executor.injected), executor, trace)


def write_mismatch_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "array", "index", "field", "replica0_hexbits",
                    "replica1_hexbits", "resolution"])
        for r in records:
            w.writerow([r.step, r.array, r.index, r.field, f"0x{r.replica0_bits:016x}",
                        f"0x{r.replica1_bits:016x}", r.resolution])


def write_health_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["array", "index", "mismatches", "window", "flagged"])
        for a, i, n, window, flagged in rows:
            w.writerow([a, i, n, window, "true" if flagged else "false"])
