"""Recursive-descent parser producing an untyped ``Module``."""
from __future__ import annotations

from miso.errors import CompileError, Diagnostic
from miso.frontend import ast
from miso.frontend.lexer import Token, tokenize


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    # -- token helpers -------------------------------------------------------

    def peek(self, offset: int = 0) -> Token | None:
        j = self.i + offset
        return self.tokens[j] if j < len(self.tokens) else None

    def at(self, lexeme: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok is not None and tok.kind != "ident" and tok.lexeme == lexeme

    def at_kind(self, kind: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok is not None and tok.kind == kind

    def fail(self, expected: str):
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            line = last.line if last else 1
            col = last.col + len(last.lexeme) if last else 1
            raise CompileError([Diagnostic(
                "error", f"expected {expected}, found end of input", line, col)])
        raise CompileError([Diagnostic(
            "error", f"expected {expected}, found {tok.lexeme!r}", tok.line, tok.col)])

    def expect(self, lexeme: str) -> Token:
        if not self.at(lexeme):
            self.fail(f"'{lexeme}'")
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_ident(self, what: str = "identifier") -> Token:
        if not self.at_kind("ident"):
            self.fail(what)
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    # -- grammar -------------------------------------------------------------

    def module(self) -> ast.Module:
        cells = []
        while self.at("cell"):
            cells.append(self.cell_decl())
        insts = []
        while self.peek() is not None:
            if self.at("cell"):
                tok = self.peek()
                raise CompileError([Diagnostic(
                    "error", "cell declarations must precede instantiations",
                    tok.line, tok.col)])
            insts.append(self.inst_decl())
        return ast.Module(tuple(cells), tuple(insts))

    def cell_decl(self) -> ast.CellTypeDecl:
        kw = self.expect("cell")
        name = self.expect_ident("cell type name")
        self.expect("{")
        fields = []
        while self.at("var"):
            fields.append(self.field_decl())
        body: list[ast.Stmt] = []
        if self.at("transition"):
            self.i += 1
            self.expect("{")
            while not self.at("}"):
                if self.peek() is None:
                    self.fail("'}'")
                body.append(self.stmt())
            self.expect("}")
        if not self.at("}"):
            self.fail("'var', 'transition' or '}'")
        self.i += 1
        return ast.CellTypeDecl(name.lexeme, tuple(fields), tuple(body), kw.line, kw.col)

    def field_decl(self) -> ast.FieldDecl:
        self.expect("var")
        name = self.expect_ident("field name")
        self.expect(":")
        ty = self.type_name()
        self.expect("=")
        init = self.expr()
        self.expect(";")
        return ast.FieldDecl(name.lexeme, ty, init, line=name.line, col=name.col)

    def type_name(self) -> str:
        if self.at("Int") or self.at("Float"):
            self.i += 1
            return self.tokens[self.i - 1].lexeme
        self.fail("type 'Int' or 'Float'")

    def stmt(self) -> ast.Stmt:
        if self.at("var"):
            self.i += 1
            name = self.expect_ident("local variable name")
            self.expect(":")
            ty = self.type_name()
            self.expect("=")
            value = self.expr()
            self.expect(";")
            return ast.LocalDecl(name.lexeme, ty, value, line=name.line, col=name.col)
        name = self.expect_ident("statement")
        self.expect("=")
        value = self.expr()
        self.expect(";")
        return ast.Assign(name.lexeme, value, line=name.line, col=name.col)

    def inst_decl(self) -> ast.InstantiationDecl:
        name = self.expect_ident("array name")
        self.expect("=")
        self.expect("new")
        cell = self.expect_ident("cell type name")
        self.expect("(")
        size = self.expr()
        self.expect(")")
        return ast.InstantiationDecl(name.lexeme, cell.lexeme, size, name.line, name.col)

    def expr(self) -> ast.Expr:
        lhs = self.term()
        while self.at("+") or self.at("-"):
            op = self.tokens[self.i]
            self.i += 1
            lhs = ast.BinOp(op.lexeme, lhs, self.term(), line=op.line, col=op.col)
        return lhs

    def term(self) -> ast.Expr:
        lhs = self.factor()
        while self.at("*") or self.at("/"):
            op = self.tokens[self.i]
            self.i += 1
            lhs = ast.BinOp(op.lexeme, lhs, self.factor(), line=op.line, col=op.col)
        return lhs

    def factor(self) -> ast.Expr:
        tok = self.peek()
        if tok is None:
            self.fail("expression")
        if self.at("-"):
            self.i += 1
            return ast.Neg(self.factor(), line=tok.line, col=tok.col)
        if self.at("("):
            self.i += 1
            inner = self.expr()
            self.expect(")")
            return inner
        if tok.kind == "float":
            self.i += 1
            return ast.FloatLit(float(tok.lexeme), tok.lexeme, tok.line, tok.col)
        if tok.kind == "int":
            self.i += 1
            return ast.IntLit(int(tok.lexeme), tok.line, tok.col)
        if self.at("this"):
            self.i += 1
            self.expect(".")
            pos = self.expect_ident("'pos'")
            if pos.lexeme != "pos":
                self.i -= 1
                self.fail("'pos'")
            return ast.ThisPos(tok.line, tok.col)
        if tok.kind == "ident":
            self.i += 1
            if self.at("("):
                self.i += 1
                index = self.expr()
                self.expect(")")
                self.expect(".")
                fld = self.expect_ident("field name")
                return ast.ArrayRead(tok.lexeme, index, fld.lexeme, tok.line, tok.col)
            return ast.Name(tok.lexeme, tok.line, tok.col)
        self.fail("expression")


def parse(tokens: list[Token]) -> ast.Module:
    return Parser(tokens).module()


def parse_source(source: str) -> ast.Module:
    return parse(tokenize(source))
