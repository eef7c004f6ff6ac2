"""Run configuration assembled from command-line flags."""
from __future__ import annotations

from dataclasses import dataclass

from miso.depend.faults import FaultModel, FaultSpec


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    source_path: str
    steps: int
    scheduler: str = "seq"
    threads: int = 1
    load_path: str | None = None
    dump_dir: str | None = None
    dump_every: int = 1
    replicate: frozenset | None | bool = False  # False: off, None: all arrays
    fault_rate: float | None = None
    inject: tuple[FaultSpec, ...] = ()
    seed: int = 0
    health_window: int = 100
    health_threshold: float = 0.1
    stats: bool = False
    trace_path: str | None = None

    def __post_init__(self):
        if self.steps < 0:
            raise UsageError("--steps must be >= 0")
        if self.threads < 1:
            raise UsageError("--threads must be >= 1")
        if self.dump_every < 1:
            raise UsageError("--every must be >= 1")
        if self.health_window < 1:
            raise UsageError("--health-window must be >= 1")
        if not 0.0 < self.health_threshold <= 1.0:
            raise UsageError("--health-threshold must be in (0, 1]")
        if self.fault_rate is not None and not 0.0 <= self.fault_rate <= 1.0:
            raise UsageError("--fault-rate must be in [0, 1]")
        if self.fault_rate is not None and self.inject:
            raise UsageError("--fault-rate and --inject are mutually exclusive")
        if (self.fault_rate is not None or self.inject) and self.replicate is False:
            raise UsageError("fault injection requires --replicate")

    @property
    def replicating(self) -> bool:
        return self.replicate is not False

    def fault_model(self) -> FaultModel:
        if self.fault_rate is not None:
            return FaultModel.random(self.fault_rate, self.seed)
        return FaultModel.targeted(self.inject, self.seed)

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        replicate: frozenset | None | bool = False
        if args.replicate is not None:
            if args.replicate == "all":
                replicate = None
            else:
                names = [n for n in args.replicate.split(",") if n]
                if not names:
                    raise UsageError("--replicate needs 'all' or a list of arrays")
                replicate = frozenset(names)
        try:
            inject = tuple(FaultSpec.parse(s) for group in args.inject for s in group)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        return cls(
            source_path=args.file, steps=args.steps, scheduler=args.scheduler,
            threads=args.threads, load_path=args.load, dump_dir=args.dump,
            dump_every=args.every, replicate=replicate, fault_rate=args.fault_rate,
            inject=inject, seed=args.seed, health_window=args.health_window,
            health_threshold=args.health_threshold, stats=args.stats,
            trace_path=args.trace,
        )
