"""``miso`` command line: check, analyze, run."""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time

from miso.analysis import build_dep_graph, classify, emit_dot
from miso.core.world import init_world
from miso.depend.replication import (
    ReplicationConfig, UnrecoverableMismatch, run_replicated, write_health_csv,
    write_mismatch_csv,
)
from miso.errors import CompileError, MisoRuntimeError, SnapshotError
from miso.frontend.typecheck import compile_source
from miso.host.config import RunConfig, UsageError
from miso.host.snapshot import columns_text, load_snapshot, write_text
from miso.sched import SchedulerKind, StepTrace, run

EXIT_OK, EXIT_COMPILE, EXIT_RUNTIME, EXIT_UNRECOVERABLE, EXIT_USAGE = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="miso", description="MISO cell-program toolchain")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    check = sub.add_parser("check", help="parse and type-check a program")
    check.add_argument("file")

    analyze = sub.add_parser("analyze", help="print the dependency graph as DOT")
    analyze.add_argument("file")

    r = sub.add_parser("run", help="execute a program")
    r.add_argument("file")
    r.add_argument("--steps", type=int, required=True)
    r.add_argument("--scheduler", choices=["seq", "barrier", "dataflow"], default="seq")
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("--load", metavar="F")
    r.add_argument("--dump", metavar="DIR")
    r.add_argument("--every", type=int, default=1, metavar="K")
    r.add_argument("--replicate", metavar="all|a1,a2,...")
    r.add_argument("--fault-rate", type=float)
    r.add_argument("--inject", action="append", nargs="+", default=[], metavar="SPEC")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--health-window", type=int, default=100)
    r.add_argument("--health-threshold", type=float, default=0.1)
    r.add_argument("--stats", action="store_true")
    r.add_argument("--trace", metavar="F")
    return p


def _read_source(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _compile(path: str):
    program = compile_source(_read_source(path))
    for d in program.warnings:
        print(f"{path}:{d}", file=sys.stderr)
    return program


def cmd_check(args) -> int:
    _compile(args.file)
    return EXIT_OK


def cmd_analyze(args) -> int:
    program = _compile(args.file)
    graph = build_dep_graph(program)
    sys.stdout.write(emit_dot(graph))
    print(classify(graph, program).summary(), file=sys.stderr)
    return EXIT_OK


class DumpWriter:
    """Collects per-array commits and writes a snapshot once every array
    has reached the same dump step (arrays may arrive out of step under
    the dataflow scheduler)."""

    def __init__(self, program, directory: str, every: int, last: int):
        self.program = program
        self.directory = directory
        self.every = every
        self.last = last
        self.pending: dict[int, dict] = {}
        self.written: list[str] = []

    def wanted(self, step: int) -> bool:
        return step % self.every == 0 or step == self.last

    def __call__(self, world, array: str) -> None:
        step = world.sigma[array]
        if not self.wanted(step):
            return
        cols = {f: c.copy() for f, c in world[array].committed.items()}
        entry = self.pending.setdefault(step, {})
        entry[array] = (step, cols)
        if len(entry) == len(self.program.arrays):
            del self.pending[step]
            self.written.append(write_text(self.directory, step, columns_text(self.program, entry)))

    def initial(self, world) -> None:
        for a in self.program.array_names:
            self(world, a)


def cmd_run(args) -> int:
    cfg = RunConfig.from_args(args)
    program = _compile(cfg.source_path)
    if cfg.replicating:
        replication = ReplicationConfig(cfg.replicate, cfg.health_window, cfg.health_threshold)
        try:
            cfg.fault_model().validate(program, replication.replicated(program))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    world = init_world(program)
    if cfg.load_path:
        load_snapshot(world, cfg.load_path)

    dumper = None
    if cfg.dump_dir:
        dumper = DumpWriter(program, cfg.dump_dir, cfg.dump_every, world_step(world) + cfg.steps)
        dumper.initial(world)
    trace = StepTrace()
    scheduler = SchedulerKind(cfg.scheduler, cfg.threads)
    t0 = time.perf_counter()
    code = EXIT_OK
    executor = None
    try:
        if not cfg.replicating:
            run(program, world, cfg.steps, scheduler, trace=trace, on_commit=dumper)
        else:
            try:
                result = run_replicated(program, world, cfg.steps, replication,
                                        cfg.fault_model(), scheduler, trace=trace,
                                        on_commit=dumper)
                executor = result.executor
            except MisoRuntimeError as exc:
                executor = getattr(exc, "executor", None)
                raise
    except UnrecoverableMismatch as exc:
        print(f"unrecoverable replica disagreement: {exc}", file=sys.stderr)
        code = EXIT_UNRECOVERABLE
    except MisoRuntimeError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        code = EXIT_RUNTIME
    wall = time.perf_counter() - t0

    if executor is not None:
        records = executor.sorted_records()
        flagged = executor.flagged()
        print(f"replication: {len(records)} mismatches, "
              f"{len(executor.injected)} faults injected, {len(flagged)} instances flagged",
              file=sys.stderr)
        for a, i in flagged:
            print(f"  suspected permanent fault: {a}[{i}]", file=sys.stderr)
        if cfg.dump_dir:
            os.makedirs(cfg.dump_dir, exist_ok=True)
            write_mismatch_csv(records, os.path.join(cfg.dump_dir, "mismatches.csv"))
            write_health_csv(executor.health_rows(), os.path.join(cfg.dump_dir, "health.csv"))
    if cfg.trace_path:
        trace.write_csv(cfg.trace_path)
    if cfg.stats:
        rate = trace.evaluations / trace.wall_seconds if trace.wall_seconds > 0 else 0.0
        print(f"steps: {cfg.steps}", file=sys.stderr)
        print(f"wall time: {wall:.6f} s", file=sys.stderr)
        print(f"{cfg.scheduler} instance-evaluations/second: {rate:.1f}", file=sys.stderr)
    return code


def world_step(world) -> int:
    return max(world.sigma.values(), default=0)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        handler = {"check": cmd_check, "analyze": cmd_analyze, "run": cmd_run}[args.command]
        return handler(args)
    except UsageError as exc:
        print(f"miso: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CompileError as exc:
        path = getattr(args, "file", "")
        for d in exc.diagnostics:
            print(f"{path}:{d}", file=sys.stderr)
        return EXIT_COMPILE
    except SnapshotError as exc:
        print(f"snapshot error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except MisoRuntimeError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
