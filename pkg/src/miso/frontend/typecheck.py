"""Name resolution, type inference and constant folding."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from types import MappingProxyType

from miso.core import values
from miso.errors import CompileError, Diagnostic
from miso.frontend import ast
from miso.frontend.ast import FLOAT, INT
from miso.frontend.parser import parse
from miso.frontend.lexer import tokenize
from miso.frontend.program import ArrayDecl, TypedProgram


class _Checker:
    def __init__(self, module: ast.Module):
        self.module = module
        self.errors: list[Diagnostic] = []
        self.warnings: list[Diagnostic] = []
        self.cells: dict[str, ast.CellTypeDecl] = {}
        self.array_types: dict[str, str] = {}

    def error(self, msg: str, node) -> None:
        self.errors.append(Diagnostic("error", msg, node.line, node.col))

    def warn(self, msg: str, node) -> None:
        self.warnings.append(Diagnostic("warning", msg, node.line, node.col))

    # -- expressions ---------------------------------------------------------

    def expr(self, e: ast.Expr, scope: "_Scope") -> ast.Expr:
        """Return a typed copy of ``e``; on error the copy gets type Int."""
        if isinstance(e, ast.IntLit):
            if e.value > values.INT_MAX:
                self.error(f"integer literal {e.value} out of range", e)
            return replace(e, ty=INT)
        if isinstance(e, ast.FloatLit):
            return replace(e, ty=FLOAT)
        if isinstance(e, ast.ThisPos):
            if not scope.allow_pos:
                self.error("'this.pos' is not allowed in a size expression", e)
            return replace(e, ty=INT)
        if isinstance(e, ast.Name):
            return self.name(e, scope)
        if isinstance(e, ast.ArrayRead):
            index = self.expr(e.index, scope)
            if not scope.allow_reads:
                self.error("array reads are not allowed in a constant expression", e)
                return replace(e, index=index, ty=INT)
            if index.ty != INT:
                self.error("array index must be Int", e.index)
            cell = self.cells.get(self.array_types.get(e.array, ""))
            if e.array not in self.array_types:
                self.error(f"unknown array '{e.array}'", e)
                return replace(e, index=index, ty=INT)
            if cell is None:
                return replace(e, index=index, ty=INT)
            ty = cell.field_type(e.field)
            if ty is None:
                self.error(f"array '{e.array}' ({cell.name}) has no field '{e.field}'", e)
                ty = INT
            return replace(e, index=index, ty=ty)
        if isinstance(e, ast.BinOp):
            lhs, rhs = self.expr(e.lhs, scope), self.expr(e.rhs, scope)
            ty = FLOAT if FLOAT in (lhs.ty, rhs.ty) else INT
            return replace(e, lhs=lhs, rhs=rhs, ty=ty)
        if isinstance(e, ast.Neg):
            operand = self.expr(e.operand, scope)
            return replace(e, operand=operand, ty=operand.ty)
        raise TypeError(f"unexpected node {e!r}")

    def name(self, e: ast.Name, scope: "_Scope") -> ast.Expr:
        if scope.cell is None:
            self.error(f"'{e.name}' is not allowed in a constant expression", e)
            return ast.IntLit(0, e.line, e.col, ty=INT)
        if e.name in scope.locals:
            return ast.LocalVar(e.name, e.line, e.col, ty=scope.locals[e.name])
        if e.name in scope.later_locals:
            self.error(f"local '{e.name}' read before its declaration", e)
            return ast.LocalVar(e.name, e.line, e.col, ty=scope.later_locals[e.name])
        ty = scope.cell.field_type(e.name)
        if ty is not None:
            if not scope.allow_reads:
                self.error(f"field '{e.name}' cannot be read in an initializer", e)
            return ast.SelfField(e.name, e.line, e.col, ty=ty)
        self.error(f"unknown identifier '{e.name}'", e)
        return ast.LocalVar(e.name, e.line, e.col, ty=INT)

    def fold(self, e: ast.Expr) -> ast.Expr:
        """Collapse a literal-only typed expression into a single literal."""
        if any(isinstance(n, (ast.ThisPos, ast.SelfField, ast.LocalVar, ast.ArrayRead))
               for n in ast.walk_expr(e)):
            return e
        try:
            v = _const(e)
        except values.ArithmeticFault as exc:
            self.error(str(exc), e)
            return e
        if e.ty == INT:
            return ast.IntLit(v, e.line, e.col, ty=INT)
        return ast.FloatLit(v, float.hex(v), e.line, e.col, ty=FLOAT)

    def coercion(self, target_ty: str, e: ast.Expr, what: str) -> bool:
        if target_ty == INT and e.ty == FLOAT:
            self.warn(f"Float value truncated toward zero when stored into Int {what}", e)
            return True
        return False

    # -- declarations --------------------------------------------------------

    def cell(self, decl: ast.CellTypeDecl) -> ast.CellTypeDecl:
        seen: set[str] = set()
        fields = []
        init_scope = _Scope(None, allow_pos=True, allow_reads=False)
        for f in decl.fields:
            if f.name in seen:
                self.error(f"duplicate field '{f.name}' in cell '{decl.name}'", f)
            seen.add(f.name)
            init = self.fold(self.expr(f.init, init_scope))
            trunc = self.coercion(f.ty, init, f"field '{f.name}'")
            fields.append(replace(f, init=init, truncate=trunc))
        decl = replace(decl, fields=tuple(fields))

        declared_later = {}
        for s in decl.transition:
            if isinstance(s, ast.LocalDecl):
                declared_later.setdefault(s.name, s.ty)
        scope = _Scope(decl, allow_pos=True, allow_reads=True, later_locals=declared_later)
        assigned: set[str] = set()
        body = []
        for s in decl.transition:
            value = self.expr(s.expr, scope)
            if isinstance(s, ast.LocalDecl):
                if s.name in scope.locals:
                    self.error(f"local '{s.name}' declared twice", s)
                elif decl.field_type(s.name) is not None:
                    self.error(f"local '{s.name}' shadows a field", s)
                scope.locals[s.name] = s.ty
                trunc = self.coercion(s.ty, value, f"local '{s.name}'")
                body.append(replace(s, expr=value, truncate=trunc))
            elif s.target in scope.locals:
                trunc = self.coercion(scope.locals[s.target], value, f"local '{s.target}'")
                body.append(ast.LocalAssign(s.target, value, trunc, s.line, s.col))
            elif s.target in declared_later:
                self.error(f"local '{s.target}' assigned before its declaration", s)
            elif decl.field_type(s.target) is not None:
                if s.target in assigned:
                    self.error(f"field '{s.target}' assigned more than once", s)
                assigned.add(s.target)
                trunc = self.coercion(decl.field_type(s.target), value, f"field '{s.target}'")
                body.append(replace(s, expr=value, truncate=trunc))
            else:
                self.error(f"unknown identifier '{s.target}'", s)
        return replace(decl, transition=tuple(body))

    def run(self, source_hash: str) -> TypedProgram:
        for decl in self.module.cells:
            if decl.name in self.cells:
                self.error(f"duplicate cell type '{decl.name}'", decl)
            else:
                self.cells[decl.name] = decl
        for inst in self.module.instantiations:
            if inst.array in self.array_types:
                self.error(f"duplicate array name '{inst.array}'", inst)
            elif inst.cell_type not in self.cells:
                self.error(f"unknown cell type '{inst.cell_type}'", inst)
            else:
                self.array_types[inst.array] = inst.cell_type

        typed_cells = {name: self.cell(d) for name, d in self.cells.items()}

        arrays = []
        names: set[str] = set()
        size_scope = _Scope(None, allow_pos=False, allow_reads=False)
        for inst in self.module.instantiations:
            size_expr = self.fold(self.expr(inst.size_expr, size_scope))
            size = 0
            if not isinstance(size_expr, ast.IntLit):
                if size_expr.ty != INT:
                    self.error("array size must be Int", inst.size_expr)
            elif size_expr.value < 1:
                self.error(f"array size must be >= 1, got {size_expr.value}", inst.size_expr)
            else:
                size = size_expr.value
            if inst.array in names or inst.cell_type not in self.cells:
                continue
            names.add(inst.array)
            arrays.append(ArrayDecl(inst.array, inst.cell_type, size, len(arrays),
                                    inst.line, inst.col))

        if self.errors:
            self.errors.sort(key=lambda d: (d.line, d.col))
            raise CompileError(self.errors + self.warnings)
        return TypedProgram(MappingProxyType(typed_cells), tuple(arrays),
                            tuple(self.warnings), source_hash)


@dataclass
class _Scope:
    cell: ast.CellTypeDecl | None
    allow_pos: bool
    allow_reads: bool
    later_locals: dict[str, str] = field(default_factory=dict)
    locals: dict[str, str] = field(default_factory=dict)


def _const(e: ast.Expr):
    if isinstance(e, (ast.IntLit, ast.FloatLit)):
        return e.value
    if isinstance(e, ast.Neg):
        return values.negate(e.ty, _const(e.operand))
    if isinstance(e, ast.BinOp):
        a, b = _const(e.lhs), _const(e.rhs)
        if e.ty == FLOAT:
            a, b = float(a), float(b)
        return values.binop(e.op, e.ty, a, b)
    raise TypeError(e)


def typecheck(module: ast.Module, source_hash: str = "") -> TypedProgram:
    return _Checker(module).run(source_hash)


def source_hash(source: str) -> str:
    return hashlib.sha256(source.encode("utf-8")).hexdigest()


def compile_source(source: str) -> TypedProgram:
    """tokenize + parse + typecheck; raises CompileError on any error."""
    return typecheck(parse(tokenize(source)), source_hash(source))
