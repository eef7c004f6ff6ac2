"""The checked program representation shared by every later stage."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from miso.errors import Diagnostic
from miso.frontend import ast


@dataclass(frozen=True)
class ArrayDecl:
    name: str
    cell_type: str
    size: int
    index: int  # declaration order, doubles as the array id
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class TypedProgram:
    cell_types: Mapping[str, ast.CellTypeDecl]
    arrays: tuple[ArrayDecl, ...]
    warnings: tuple[Diagnostic, ...] = ()
    source_hash: str = ""

    def array(self, name: str) -> ArrayDecl:
        for a in self.arrays:
            if a.name == name:
                return a
        raise KeyError(name)

    def cell_of(self, array: str) -> ast.CellTypeDecl:
        return self.cell_types[self.array(array).cell_type]

    @property
    def array_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.arrays)
