"""Compilation errors.

A configuration that is neither finished nor able to step is reported as a
``CompileError`` whose ``kind`` names the reason it is stuck.
"""

from __future__ import annotations

import enum
from typing import Optional

from .syntax import Pos, Scope


class ErrorKind(enum.Enum):
    UndefinedVariable = "UndefinedVariable"
    DuplicateVariable = "DuplicateVariable"
    DuplicateResource = "DuplicateResource"
    UndefinedDefinition = "UndefinedDefinition"
    DuplicateDefinition = "DuplicateDefinition"
    ClassAlreadyDeclared = "ClassAlreadyDeclared"
    MissingParameter = "MissingParameter"
    UnknownParameter = "UnknownParameter"
    TypeMismatch = "TypeMismatch"
    DivisionByZero = "DivisionByZero"
    SelectorNoMatch = "SelectorNoMatch"
    BadDereference = "BadDereference"
    InheritanceCycle = "InheritanceCycle"
    ExplicitFailure = "ExplicitFailure"
    StepLimitExceeded = "StepLimitExceeded"
    InternalStuck = "InternalStuck"

    @classmethod
    def parse(cls, text: str) -> "ErrorKind":
        """Accept ``DuplicateResource``, ``duplicate-resource``, ``duplicate_resource``."""
        key = text.strip().replace("-", "").replace("_", "").lower()
        for kind in cls:
            if kind.value.lower() == key:
                return kind
        raise ValueError(f"unknown error kind {text!r}")


class CompileError(Exception):
    def __init__(
        self,
        kind: ErrorKind,
        message: str,
        pos: Optional[Pos] = None,
        scope: Optional[Scope] = None,
    ):
        self.kind = kind
        self.message = message
        self.pos = pos
        self.scope = scope
        self.trace = None  # set by compile when tracing
        super().__init__(message)

    def located(self, pos: Optional[Pos], scope: Optional[Scope]) -> "CompileError":
        """Fill in position and scope if not already known."""
        if self.pos is None:
            self.pos = pos
        if self.scope is None:
            self.scope = scope
        return self

    def __str__(self) -> str:
        where = f"{self.pos}: " if self.pos else ""
        scope = f" [scope {self.scope}]" if self.scope is not None else ""
        return f"{where}{self.kind.value}: {self.message}{scope}"


class DuplicateResourceError(CompileError):
    def __init__(self, type_name: str, title: str, first_pos=None, pos=None):
        self.type_name = type_name
        self.title = title
        self.first_pos = first_pos
        msg = f"duplicate declaration of {type_name.capitalize()}[{title!r}]"
        if first_pos is not None:
            msg += f" (first declared at {first_pos})"
        super().__init__(ErrorKind.DuplicateResource, msg, pos)


class DuplicateVariableError(CompileError):
    def __init__(self, scope: Scope, name: str, pos=None):
        self.name = name
        super().__init__(
            ErrorKind.DuplicateVariable,
            f"cannot reassign variable ${name} in scope {scope}",
            pos,
            scope,
        )


class MissingParameterError(CompileError):
    def __init__(self, name: str, pos=None):
        self.name = name
        super().__init__(
            ErrorKind.MissingParameter, f"parameter ${name} has no default and no value was given", pos
        )


class UnknownParameterError(CompileError):
    def __init__(self, name: str, pos=None):
        self.name = name
        super().__init__(ErrorKind.UnknownParameter, f"no parameter named {name!r}", pos)
