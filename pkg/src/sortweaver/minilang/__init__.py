"""MiniLang frontend: parse Java-like sources and emit fact records."""

from .ast import CompilationUnit, Diagnostic, ParseResult, Position
from .extract import ExtractResult, count_statements, extract_facts
from .parser import parse

__all__ = [
    "CompilationUnit",
    "Diagnostic",
    "ExtractResult",
    "ParseResult",
    "Position",
    "count_statements",
    "extract_facts",
    "parse",
]
