"""Pretty-printer; output re-parses to a structurally equal tree."""
from __future__ import annotations

import numpy as np

from miso.frontend import ast

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def format_float(value: float) -> str:
    """Shortest positional literal accepted by the lexer (no exponent)."""
    text = np.format_float_positional(value, unique=True, trim="0")
    return text if "." in text else text + ".0"


def expr_str(e: ast.Expr, parent_prec: int = 0, right: bool = False) -> str:
    if isinstance(e, ast.IntLit):
        return str(e.value)
    if isinstance(e, ast.FloatLit):
        return e.text if e.text and not e.text.startswith(("0x", "-")) else format_float(e.value)
    if isinstance(e, (ast.Name, ast.SelfField, ast.LocalVar)):
        return e.name
    if isinstance(e, ast.ThisPos):
        return "this.pos"
    if isinstance(e, ast.ArrayRead):
        return f"{e.array}({expr_str(e.index)}).{e.field}"
    if isinstance(e, ast.Neg):
        inner = expr_str(e.operand, 3)
        return f"-{inner}"
    if isinstance(e, ast.BinOp):
        prec = _PREC[e.op]
        text = f"{expr_str(e.lhs, prec)} {e.op} {expr_str(e.rhs, prec, right=True)}"
        if prec < parent_prec or (right and prec == parent_prec):
            return f"({text})"
        return text
    raise TypeError(e)


def stmt_str(s: ast.Stmt) -> str:
    if isinstance(s, ast.LocalDecl):
        return f"var {s.name}:{s.ty} = {expr_str(s.expr)};"
    target = s.target if isinstance(s, ast.Assign) else s.name
    return f"{target} = {expr_str(s.expr)};"


def module_str(module: ast.Module) -> str:
    out = []
    for cell in module.cells:
        out.append(f"cell {cell.name} {{")
        for f in cell.fields:
            out.append(f"  var {f.name}:{f.ty} = {expr_str(f.init)};")
        if cell.transition:
            out.append("  transition {")
            out.extend(f"    {stmt_str(s)}" for s in cell.transition)
            out.append("  }")
        out.append("}")
        out.append("")
    for inst in module.instantiations:
        out.append(f"{inst.array} = new {inst.cell_type}({expr_str(inst.size_expr)})")
    return "\n".join(out) + "\n"
