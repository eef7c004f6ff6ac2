"""Bit-flip fault model applied to computed next-state columns."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from miso.depend import rng

RANDOM = "random"
TARGETED = "targeted"

# independent draw streams per instance
_HIT, _FIELD, _BIT = 0, 1, 2


@dataclass(frozen=True, order=True)
class FaultSpec:
    """One bit flip: ``step`` is the step whose computed state gets corrupted."""
    array: str
    index: int
    step: int
    replica: int
    field: str
    bit: int

    @classmethod
    def parse(cls, text: str) -> "FaultSpec":
        """``array:index:step:replica:field:bit``"""
        parts = text.split(":")
        if len(parts) != 6:
            raise ValueError(f"fault spec {text!r} must be array:index:step:replica:field:bit")
        array, index, step, replica, fld, bit = parts
        try:
            return cls(array, int(index), int(step), int(replica), fld, int(bit))
        except ValueError:
            raise ValueError(f"fault spec {text!r} has a non-integer coordinate") from None

    def __str__(self) -> str:
        return f"{self.array}:{self.index}:{self.step}:{self.replica}:{self.field}:{self.bit}"


@dataclass(frozen=True)
class FaultModel:
    mode: str = TARGETED
    rate: float = 0.0
    specs: tuple[FaultSpec, ...] = ()
    seed: int = 0
    _by_site: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.mode not in (RANDOM, TARGETED):
            raise ValueError(f"unknown fault mode {self.mode!r}")
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError("fault rate must be within [0, 1]")
        by_site: dict = {}
        for s in self.specs:
            by_site.setdefault((s.array, s.step, s.replica), []).append(s)
        object.__setattr__(self, "_by_site", by_site)

    @classmethod
    def none(cls) -> "FaultModel":
        return cls()

    @classmethod
    def random(cls, rate: float, seed: int = 0) -> "FaultModel":
        return cls(RANDOM, rate, (), seed)

    @classmethod
    def targeted(cls, specs, seed: int = 0) -> "FaultModel":
        return cls(TARGETED, 0.0, tuple(specs), seed)

    def validate(self, program, replicated) -> None:
        """Reject specs that point outside the program or at unreplicated arrays."""
        for s in self.specs:
            try:
                decl = program.array(s.array)
            except KeyError:
                raise ValueError(f"fault spec {s}: unknown array") from None
            if s.array not in replicated:
                raise ValueError(f"fault spec {s}: array is not replicated")
            if not 0 <= s.index < decl.size:
                raise ValueError(f"fault spec {s}: index out of range")
            if program.cell_types[decl.cell_type].field_type(s.field) is None:
                raise ValueError(f"fault spec {s}: unknown field")
            if s.replica not in (0, 1) or not 0 <= s.bit <= 63 or s.step < 1:
                raise ValueError(f"fault spec {s}: replica, bit or step out of range")

    def plan(self, step: int, array: str, array_id: int, replica: int,
             fields: tuple[str, ...], size: int) -> list[FaultSpec]:
        """Flips to apply to one replica of one array at ``step``."""
        if self.mode == TARGETED:
            return list(self._by_site.get((array, step, replica), ()))
        if self.rate <= 0.0 or not fields:
            return []
        idx = np.arange(size, dtype=np.uint64)
        hit = rng.uniform(rng.draw(self.seed, step, array_id, idx, replica, _HIT)) < self.rate
        hits = np.flatnonzero(hit)
        if hits.size == 0:
            return []
        which = rng.draw(self.seed, step, array_id, hits, replica, _FIELD) % np.uint64(len(fields))
        bits = rng.draw(self.seed, step, array_id, hits, replica, _BIT) & np.uint64(63)
        return [FaultSpec(array, int(i), step, replica, fields[int(f)], int(b))
                for i, f, b in zip(hits, which, bits)]


def flip(columns: dict, spec: FaultSpec) -> None:
    col = columns[spec.field]
    col.view(np.uint64)[spec.index] ^= np.uint64(1 << spec.bit)


def inject_faults(model: FaultModel, step: int, array: str, array_id: int,
                  replica: int, scratch: dict, fields: tuple[str, ...]) -> list[FaultSpec]:
    """Apply the model's flips for this site to ``scratch``; returns what was applied."""
    size = len(next(iter(scratch.values()))) if scratch else 0
    applied = model.plan(step, array, array_id, replica, fields, size)
    for spec in applied:
        flip(scratch, spec)
    return applied
