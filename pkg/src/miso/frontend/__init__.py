"""Lexer, parser, type checker and pretty-printer for MISO source."""
from miso.frontend.lexer import Token, tokenize
from miso.frontend.parser import parse, parse_source
from miso.frontend.printer import module_str
from miso.frontend.program import ArrayDecl, TypedProgram
from miso.frontend.typecheck import compile_source, typecheck

__all__ = [
    "ArrayDecl", "Token", "TypedProgram", "compile_source", "module_str",
    "parse", "parse_source", "tokenize", "typecheck",
]
