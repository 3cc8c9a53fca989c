"""CVL: a small C subset with preprocessor feature guards."""

from .parser import (
    Diagnostic,
    ParseError,
    Program,
    SourceUnit,
    build_model,
    lint_model,
    parse,
    parse_files,
    parse_program,
)
from .printer import format_unit

__all__ = [
    "Diagnostic",
    "ParseError",
    "Program",
    "SourceUnit",
    "build_model",
    "format_unit",
    "lint_model",
    "parse",
    "parse_files",
    "parse_program",
]
