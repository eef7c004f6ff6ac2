"""Double-buffered, column-major world state."""
from __future__ import annotations

import hashlib

import numpy as np

from miso.core.values import DTYPES
from miso.frontend.ast import CellTypeDecl
from miso.frontend.program import ArrayDecl, TypedProgram


class CellArrayState:
    """Two banks of per-field columns for one cell array.

    The bank holding committed step ``s`` is always ``banks[s % 2]``; the
    other bank is scratch for step ``s + 1``.
    """

    def __init__(self, decl: ArrayDecl, cell: CellTypeDecl):
        self.decl = decl
        self.cell = cell
        self.banks = [
            {f.name: np.zeros(decl.size, DTYPES[f.ty]) for f in cell.fields}
            for _ in range(2)
        ]
        self.active = 0

    @property
    def name(self) -> str:
        return self.decl.name

    @property
    def size(self) -> int:
        return self.decl.size

    @property
    def committed(self) -> dict[str, np.ndarray]:
        return self.banks[self.active]

    @property
    def scratch(self) -> dict[str, np.ndarray]:
        return self.banks[1 - self.active]

    def copy(self) -> "CellArrayState":
        other = CellArrayState.__new__(CellArrayState)
        other.decl, other.cell, other.active = self.decl, self.cell, self.active
        other.banks = [{k: v.copy() for k, v in bank.items()} for bank in self.banks]
        return other


class WorldState:
    def __init__(self, program: TypedProgram):
        self.program = program
        self.arrays: dict[str, CellArrayState] = {
            a.name: CellArrayState(a, program.cell_types[a.cell_type])
            for a in program.arrays
        }
        self.sigma: dict[str, int] = {a.name: 0 for a in program.arrays}

    def __getitem__(self, name: str) -> CellArrayState:
        return self.arrays[name]

    def copy(self) -> "WorldState":
        other = WorldState.__new__(WorldState)
        other.program = self.program
        other.arrays = {k: v.copy() for k, v in self.arrays.items()}
        other.sigma = dict(self.sigma)
        return other

    def commit(self, name: str) -> None:
        """Make the scratch bank of ``name`` the committed one."""
        arr = self.arrays[name]
        arr.active = 1 - arr.active
        self.sigma[name] += 1

    def bank_at(self, name: str, step: int) -> dict[str, np.ndarray]:
        """Columns of ``name`` as committed at ``step`` (current or previous)."""
        sigma = self.sigma[name]
        if step not in (sigma, sigma - 1):
            raise ValueError(f"{name} is at step {sigma}; step {step} is not buffered")
        return self.arrays[name].banks[step % 2]

    def column(self, name: str, field: str) -> np.ndarray:
        return self.arrays[name].committed[field]

    def checksum(self, names=None) -> str:
        """SHA-256 over the raw bytes of the committed banks."""
        h = hashlib.sha256()
        for a in self.program.arrays:
            if names is not None and a.name not in names:
                continue
            arr = self.arrays[a.name]
            h.update(a.name.encode())
            for f in arr.cell.fields:
                h.update(f.name.encode())
                h.update(arr.committed[f.name].tobytes())
        return h.hexdigest()

    def identical(self, other: "WorldState") -> bool:
        """Bit-exact equality of committed state and step counters."""
        if self.sigma != other.sigma:
            return False
        for name, arr in self.arrays.items():
            theirs = other.arrays[name].committed
            for f, col in arr.committed.items():
                if col.tobytes() != theirs[f].tobytes():
                    return False
        return True


def init_world(program: TypedProgram) -> WorldState:
    """Allocate every array and evaluate field initializers into bank 0."""
    from miso.core.kernels import init_columns

    world = WorldState(program)
    for arr in world.arrays.values():
        for name, col in init_columns(arr.cell, arr.name, arr.size).items():
            arr.banks[0][name][:] = col
    return world


def commit(world: WorldState, name: str) -> None:
    world.commit(name)
