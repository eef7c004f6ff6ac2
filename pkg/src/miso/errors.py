"""Diagnostics and exception types shared across the toolchain."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    message: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.severity}: {self.message}"


class CompileError(Exception):
    """Raised when a source program fails to lex, parse or type-check."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class MisoRuntimeError(Exception):
    """Failure while evaluating a transition or initializer.

    ``array``/``index``/``step`` locate the failing instance; ``line``/``col``
    point at the statement (or expression) that failed.
    """

    def __init__(self, message: str, array: str | None = None,
                 index: int | None = None, step: int | None = None,
                 line: int | None = None, col: int | None = None):
        self.message = message
        self.array = array
        self.index = index
        self.step = step
        self.line = line
        self.col = col
        super().__init__(self._render())

    def _render(self) -> str:
        where = []
        if self.array is not None:
            where.append(f"{self.array}[{self.index}]")
        if self.step is not None:
            where.append(f"step {self.step}")
        if self.line is not None:
            where.append(f"at {self.line}:{self.col}")
        return f"{self.message} ({', '.join(where)})" if where else self.message

    def located(self, **kw) -> "MisoRuntimeError":
        """Return a copy with unset location fields filled in from ``kw``."""
        fields = dict(array=self.array, index=self.index, step=self.step,
                      line=self.line, col=self.col)
        for k, v in kw.items():
            if fields[k] is None:
                fields[k] = v
        return MisoRuntimeError(self.message, **fields)


class SnapshotError(Exception):
    """Malformed snapshot file; ``row`` is the 1-based line number."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)
