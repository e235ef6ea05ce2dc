"""A compiler for a small subset of Puppet manifests.

Manifests are parsed into an AST and run with a small-step semantics that
threads a variable environment, a definition environment and a catalog.
"""

from .errors import CompileError, ErrorKind
from .evaluator import EXPR, MANIFEST, STMT, Configuration, Limits, Result, compile, step
from .parser import ParseError, parse_expression, parse_manifest
from .printer import pretty
from .values import ResourceValue

__all__ = [
    "CompileError", "Configuration", "ErrorKind", "EXPR", "Limits", "MANIFEST", "ParseError",
    "ResourceValue", "Result", "STMT", "compile", "parse_expression", "parse_manifest",
    "pretty", "step",
]
