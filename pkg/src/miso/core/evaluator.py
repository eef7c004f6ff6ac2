"""Per-instance reference evaluator.

Reads always go through a ``ReadView``, which pins for every array the bank
holding the committed step the evaluation is allowed to observe.
"""
from __future__ import annotations

from typing import Mapping

import numpy as np

from miso.core import values
from miso.core.values import FLOAT
from miso.core.world import WorldState
from miso.errors import MisoRuntimeError
from miso.frontend import ast


class ReadView:
    """Previous-state read access for computing step ``step + 1``.

    ``overrides`` replaces the columns of specific arrays (a replica's own
    banks). ``trace``, when a set, collects every array name actually read.
    """

    def __init__(self, world: WorldState, step: int,
                 overrides: Mapping[str, Mapping[str, np.ndarray]] | None = None,
                 trace: set | None = None):
        self.world = world
        self.step = step
        self.overrides = overrides or {}
        self.trace = trace

    def columns(self, array: str) -> Mapping[str, np.ndarray]:
        if self.trace is not None:
            self.trace.add(array)
        if array in self.overrides:
            return self.overrides[array]
        return self.world.bank_at(array, self.step)

    def own(self, array: str) -> Mapping[str, np.ndarray]:
        """Previous columns of the evaluating array, for copy-forward (not traced)."""
        if array in self.overrides:
            return self.overrides[array]
        return self.world.bank_at(array, self.step)

    def size(self, array: str) -> int:
        return self.world.arrays[array].size


def _py(x):
    return x.item() if isinstance(x, np.generic) else x


def eval_expr(expr: ast.Expr, view: ReadView, array: str, index: int,
              local_env: dict):
    """Evaluate a typed expression for one instance; returns a Python int/float."""
    if isinstance(expr, (ast.IntLit, ast.FloatLit)):
        return expr.value
    if isinstance(expr, ast.ThisPos):
        return index
    if isinstance(expr, ast.SelfField):
        return _py(view.columns(array)[expr.name][index])
    if isinstance(expr, ast.LocalVar):
        return local_env[expr.name]
    if isinstance(expr, ast.ArrayRead):
        i = eval_expr(expr.index, view, array, index, local_env)
        size = view.size(expr.array)
        if not 0 <= i < size:
            raise MisoRuntimeError(
                f"index {i} out of range for array '{expr.array}' of size {size}",
                line=expr.line, col=expr.col)
        return _py(view.columns(expr.array)[expr.field][i])
    if isinstance(expr, ast.Neg):
        return values.negate(expr.ty, eval_expr(expr.operand, view, array, index, local_env))
    if isinstance(expr, ast.BinOp):
        a = eval_expr(expr.lhs, view, array, index, local_env)
        b = eval_expr(expr.rhs, view, array, index, local_env)
        if expr.ty == FLOAT:
            a, b = float(a), float(b)
        try:
            return values.binop(expr.op, expr.ty, a, b)
        except values.ArithmeticFault as exc:
            raise MisoRuntimeError(str(exc), line=expr.line, col=expr.col) from None
    raise TypeError(f"untyped or unknown node {expr!r}")


def _store(value, ty: str, stmt: ast.Stmt):
    try:
        return values.coerce(value, ty)
    except values.ArithmeticFault as exc:
        raise MisoRuntimeError(str(exc), line=stmt.line, col=stmt.col) from None


def eval_transition(program, view: ReadView, array: str, index: int) -> dict:
    """Next field values of one instance, as a field -> value dict.

    Unassigned fields carry their previous value forward.
    """
    cell = program.cell_of(array)
    prev = view.own(array) if cell.fields else {}
    out = {f.name: _py(prev[f.name][index]) for f in cell.fields}
    local_env: dict = {}
    local_ty: dict = {}
    for stmt in cell.transition:
        try:
            value = eval_expr(stmt.expr, view, array, index, local_env)
            if isinstance(stmt, ast.Assign):
                out[stmt.target] = _store(value, cell.field_type(stmt.target), stmt)
            elif isinstance(stmt, ast.LocalDecl):
                local_ty[stmt.name] = stmt.ty
                local_env[stmt.name] = _store(value, stmt.ty, stmt)
            else:
                local_env[stmt.name] = _store(value, local_ty[stmt.name], stmt)
        except MisoRuntimeError as exc:
            raise MisoRuntimeError(exc.message, array, index, view.step + 1,
                                   stmt.line, stmt.col) from None
    return out


def eval_init(field: ast.FieldDecl, array: str, index: int):
    """Initial value of ``field`` for one instance (initializers see only this.pos)."""
    try:
        value = eval_expr(field.init, None, array, index, {})
        return values.coerce(value, field.ty)
    except values.ArithmeticFault as exc:
        raise MisoRuntimeError(str(exc), array=array, index=index, step=0,
                               line=field.line, col=field.col) from None
    except MisoRuntimeError as exc:
        raise exc.located(array=array, index=index, step=0) from None

