"""Vectorised (column-at-a-time) evaluation of transitions and initializers.

Each typed expression compiles to a closure over numpy columns that covers a
whole block of instances at once. Any element that would fault makes the
block bail out; the block is then replayed instance by instance through the
reference evaluator, which raises the precise error for the first failing
instance.
"""
from __future__ import annotations

import numpy as np

from miso.core import values
from miso.core.evaluator import ReadView, eval_expr, eval_init, eval_transition
from miso.core.values import DTYPES, FLOAT, INT
from miso.errors import MisoRuntimeError
from miso.frontend import ast

_TWO63 = float(2 ** 63)


class Bail(Exception):
    """Some element of the block faults; replay through the scalar path."""


class _Ctx:
    __slots__ = ("view", "array", "sel", "n", "_pos", "locals")

    def __init__(self, view, array, sel, n):
        self.view = view
        self.array = array
        self.sel = sel
        self.n = n
        self._pos = None
        self.locals = {}

    @property
    def pos(self) -> np.ndarray:
        if self._pos is None:
            if isinstance(self.sel, slice):
                self._pos = np.arange(self.sel.start, self.sel.stop, dtype=np.int64)
            else:
                self._pos = np.asarray(self.sel, dtype=np.int64)
        return self._pos


def _is_const(e: ast.Expr) -> bool:
    return not any(isinstance(n, (ast.ThisPos, ast.SelfField, ast.LocalVar, ast.ArrayRead))
                   for n in ast.walk_expr(e))


def _scalar(value, ty):
    return np.int64(value) if ty == INT else np.float64(value)


def _as_float(x):
    return x.astype(np.float64) if x.dtype.kind == "i" else x


def _float_op(op):
    def apply(a, b):
        r = op(_as_float(np.asarray(a)), _as_float(np.asarray(b)))
        nan = np.isnan(r)
        if nan.any():
            r = np.where(nan, values.CANONICAL_NAN, r)
        return r
    return apply


def _int_div(a, b):
    if np.any(b == 0):
        raise Bail
    q = np.floor_divide(a, b)
    r = a - q * b
    return q + ((r != 0) & ((a < 0) != (b < 0)))


def truncate(x):
    """Float -> Int store: toward zero, wrapping magnitudes beyond 2**63."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise Bail
    big = np.abs(x) >= _TWO63
    if not np.any(big):
        return x.astype(np.int64)
    out = np.where(big, 0.0, x).astype(np.int64)
    flat = out.reshape(-1)
    for k in np.flatnonzero(big.reshape(-1)):
        flat[k] = values.truncate(float(x.reshape(-1)[k]))
    return out


def coerce(x, ty: str):
    x = np.asarray(x)
    if ty == INT:
        return truncate(x) if x.dtype.kind == "f" else x
    return _as_float(x)


def _always_bail(ctx):
    raise Bail


def compile_expr(e: ast.Expr):
    """Closure ``ctx -> ndarray | numpy scalar`` computing ``e`` for a block."""
    if _is_const(e):
        try:
            k = _scalar(eval_expr(e, None, "", 0, {}), e.ty)
        except MisoRuntimeError:
            return _always_bail
        return lambda ctx: k
    if isinstance(e, ast.ThisPos):
        return lambda ctx: ctx.pos
    if isinstance(e, ast.SelfField):
        name = e.name
        return lambda ctx: ctx.view.columns(ctx.array)[name][ctx.sel]
    if isinstance(e, ast.LocalVar):
        name = e.name
        return lambda ctx: ctx.locals[name]
    if isinstance(e, ast.ArrayRead):
        return _compile_read(e)
    if isinstance(e, ast.Neg):
        inner = compile_expr(e.operand)
        return lambda ctx: np.negative(inner(ctx))
    if isinstance(e, ast.BinOp):
        lhs, rhs = compile_expr(e.lhs), compile_expr(e.rhs)
        if e.ty == FLOAT:
            op = _float_op({"+": np.add, "-": np.subtract, "*": np.multiply,
                            "/": np.divide}[e.op])
            return lambda ctx: op(lhs(ctx), rhs(ctx))
        if e.op == "/":
            return lambda ctx: _int_div(lhs(ctx), rhs(ctx))
        op = {"+": np.add, "-": np.subtract, "*": np.multiply}[e.op]
        return lambda ctx: op(lhs(ctx), rhs(ctx))
    raise TypeError(f"untyped or unknown node {e!r}")


def _compile_read(e: ast.ArrayRead):
    array, field = e.array, e.field
    if isinstance(e.index, ast.ThisPos):
        def read_same_pos(ctx):
            size = ctx.view.size(array)
            col = ctx.view.columns(array)[field]
            sel = ctx.sel
            if isinstance(sel, slice):
                if sel.stop > size:
                    raise Bail
                return col[sel]
            if np.any(sel >= size):
                raise Bail
            return col[sel]
        return read_same_pos

    index = compile_expr(e.index)

    def read(ctx):
        i = index(ctx)
        size = ctx.view.size(array)
        if np.any(i < 0) or np.any(i >= size):
            raise Bail
        return ctx.view.columns(array)[field][i]
    return read


class TransitionKernel:
    """Compiled transition of one cell type."""

    def __init__(self, cell: ast.CellTypeDecl):
        self.cell = cell
        self.field_types = {f.name: f.ty for f in cell.fields}
        self.steps = []
        local_ty = {}
        for s in cell.transition:
            if isinstance(s, ast.Assign):
                self.steps.append(("field", s.target, self.field_types[s.target], compile_expr(s.expr)))
            else:
                if isinstance(s, ast.LocalDecl):
                    local_ty[s.name] = s.ty
                self.steps.append(("local", s.name, local_ty[s.name], compile_expr(s.expr)))

    def run(self, view: ReadView, array: str, sel, n: int, out=None) -> dict:
        """Evaluate instances ``sel`` (a slice or index array of length ``n``).

        Writes into ``out[field][sel]`` when ``out`` is given, otherwise
        returns fresh columns of length ``n``. Raises Bail on any fault.
        """
        ctx = _Ctx(view, array, sel, n)
        assigned = {}
        with np.errstate(all="ignore"):
            for kind, name, ty, fn in self.steps:
                value = coerce(fn(ctx), ty)
                if kind == "field":
                    assigned[name] = value
                else:
                    ctx.locals[name] = value
        prev = view.own(array) if self.field_types else {}
        result = {}
        for name, ty in self.field_types.items():
            value = assigned[name] if name in assigned else prev[name][sel]
            if out is not None:
                out[name][sel] = value
            else:
                col = np.empty(n, DTYPES[ty])
                col[:] = value
                result[name] = col
        return result


class Kernels:
    """Transition kernels for every cell type of a program."""

    def __init__(self, program):
        self.program = program
        self.by_cell = {name: TransitionKernel(c) for name, c in program.cell_types.items()}

    def for_array(self, array: str) -> TransitionKernel:
        return self.by_cell[self.program.array(array).cell_type]

    def evaluate(self, view: ReadView, array: str, lo: int, hi: int, out) -> None:
        """Write next values of instances [lo, hi) into ``out`` columns."""
        try:
            self.for_array(array).run(view, array, slice(lo, hi), hi - lo, out)
        except Bail:
            self._replay(view, array, range(lo, hi))

    def evaluate_at(self, view: ReadView, array: str, indices: np.ndarray) -> dict:
        """Next values of selected instances, as fresh columns."""
        try:
            return self.for_array(array).run(view, array, indices, len(indices))
        except Bail:
            self._replay(view, array, indices.tolist())

    def _replay(self, view, array, indices):
        for i in indices:
            eval_transition(self.program, view, array, i)
        raise AssertionError(f"vector kernel bailed on {array} but no instance faults")


def init_columns(cell: ast.CellTypeDecl, array: str, size: int) -> dict:
    """Initial columns of an array: each field initializer evaluated at this.pos."""
    ctx = _Ctx(None, array, slice(0, size), size)
    cols = {}
    for f in cell.fields:
        try:
            with np.errstate(all="ignore"):
                value = coerce(compile_expr(f.init)(ctx), f.ty)
        except Bail:
            for i in range(size):
                eval_init(f, array, i)
            raise AssertionError("initializer bailed but no instance faults")
        col = np.empty(size, DTYPES[f.ty])
        col[:] = value
        cols[f.name] = col
    return cols
