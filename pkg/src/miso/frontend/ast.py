"""Syntax tree node types.

The parser produces ``Name`` and ``Assign`` nodes whose meaning depends on
scope. The type checker rewrites them into ``SelfField``/``LocalVar`` and
``Assign``/``LocalAssign`` and fills in ``ty`` on every expression.
Positions and types are excluded from equality so trees compare structurally.
"""
from __future__ import annotations

from dataclasses import dataclass, field

INT = "Int"
FLOAT = "Float"


def _pos():
    return field(default=0, compare=False, repr=False)


def _ty():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class IntLit(Expr):
    value: int
    line: int = _pos()
    col: int = _pos()
    ty: str | None = _ty()


@dataclass(frozen=True)
class FloatLit(Expr):
    value: float
    text: str = field(default="", compare=False, repr=False)
    line: int = _pos()
    col: int = _pos()
    ty: str | None = _ty()


@dataclass(frozen=True)
class Name(Expr):
    """Bare identifier before scope resolution."""
    name: str
    line: int = _pos()
    col: int = _pos()
    ty: str | None = _ty()


@dataclass(frozen=True)
class SelfField(Expr):
    name: str
    line: int = _pos()
    col: int = _pos()
    ty: str | None = _ty()


@dataclass(frozen=True)
class LocalVar(Expr):
    name: str
    line: int = _pos()
    col: int = _pos()
    ty: str | None = _ty()


@dataclass(frozen=True)
class ThisPos(Expr):
    line: int = _pos()
    col: int = _pos()
    ty: str | None = _ty()


@dataclass(frozen=True)
class ArrayRead(Expr):
    array: str
    index: Expr
    field: str
    line: int = _pos()
    col: int = _pos()
    ty: str | None = _ty()


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    lhs: Expr
    rhs: Expr
    line: int = _pos()
    col: int = _pos()
    ty: str | None = _ty()


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr
    line: int = _pos()
    col: int = _pos()
    ty: str | None = _ty()


@dataclass(frozen=True)
class Stmt:
    pass


@dataclass(frozen=True)
class Assign(Stmt):
    """Write to a state field (``target`` is unresolved straight out of the parser)."""
    target: str
    expr: Expr
    truncate: bool = field(default=False, compare=False)
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True)
class LocalDecl(Stmt):
    name: str
    ty: str
    expr: Expr
    truncate: bool = field(default=False, compare=False)
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True)
class LocalAssign(Stmt):
    name: str
    expr: Expr
    truncate: bool = field(default=False, compare=False)
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True)
class FieldDecl:
    name: str
    ty: str
    init: Expr
    truncate: bool = field(default=False, compare=False)
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True)
class CellTypeDecl:
    name: str
    fields: tuple[FieldDecl, ...]
    transition: tuple[Stmt, ...]
    line: int = _pos()
    col: int = _pos()

    def field_type(self, name: str) -> str | None:
        for f in self.fields:
            if f.name == name:
                return f.ty
        return None

    @property
    def field_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.fields)


@dataclass(frozen=True)
class InstantiationDecl:
    array: str
    cell_type: str
    size_expr: Expr
    line: int = _pos()
    col: int = _pos()


@dataclass(frozen=True)
class Module:
    """Untyped parse result, in declaration order."""
    cells: tuple[CellTypeDecl, ...]
    instantiations: tuple[InstantiationDecl, ...]


def walk_expr(expr: Expr):
    """Yield ``expr`` and all sub-expressions in evaluation (post-)order."""
    if isinstance(expr, ArrayRead):
        yield from walk_expr(expr.index)
    elif isinstance(expr, BinOp):
        yield from walk_expr(expr.lhs)
        yield from walk_expr(expr.rhs)
    elif isinstance(expr, Neg):
        yield from walk_expr(expr.operand)
    yield expr
