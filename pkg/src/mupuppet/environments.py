"""Scopes, variable environments (σ), definition environments (κ) and merge.

σ is a persistent map from scope to a persistent map of name -> value, so
``clear`` drops one key. κ is a persistent map from name to a definition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from pyrsistent import PMap, pmap

from . import syntax as S
from .errors import (
    CompileError,
    DuplicateVariableError,
    ErrorKind,
    MissingParameterError,
    UnknownParameterError,
)
from .values import from_python, hash_lookup, is_value

VarEnv = PMap  # Scope -> PMap[str, Value]
DefEnv = PMap  # str -> Definition

EMPTY_VARS: VarEnv = pmap()
EMPTY_DEFS: DefEnv = pmap()


@dataclass(frozen=True)
class ClassDefinition:
    parent: Optional[str]
    params: S.Params
    body: S.Statement


@dataclass(frozen=True)
class DeclaredClass:
    scope: S.Scope


@dataclass(frozen=True)
class ResourceDefinition:
    params: S.Params
    body: S.Statement


Definition = ClassDefinition | DeclaredClass | ResourceDefinition


class UndefinedParent(Exception):
    """Raised when scope ancestry reaches a class that is not declared."""


# -- σ ----------------------------------------------------------------------


def env_get(sigma: VarEnv, scope: S.Scope, name: str):
    frame = sigma.get(scope)
    if frame is None:
        return None
    return frame.get(name)


def env_has(sigma: VarEnv, scope: S.Scope, name: str) -> bool:
    frame = sigma.get(scope)
    return frame is not None and name in frame


def env_update(sigma: VarEnv, scope: S.Scope, name: str, value, pos=None) -> VarEnv:
    frame = sigma.get(scope, pmap())
    if name in frame:
        raise DuplicateVariableError(scope, name, pos)
    return sigma.set(scope, frame.set(name, value))


def env_clear(sigma: VarEnv, scope: S.Scope) -> VarEnv:
    return sigma.discard(scope)


def env_from_facts(facts) -> VarEnv:
    sigma = EMPTY_VARS
    """σ₀: facts bound at top scope. Plain Python data is converted to values."""
    if isinstance(facts, dict):
        facts = facts.items()
    for name, value in facts:
        sigma = env_update(sigma, S.TOP, name, value if is_value(value) else from_python(value))
    return sigma


def env_items(sigma: VarEnv):
    """All ((scope, name), value) bindings."""
    for scope, frame in sigma.items():
        for name, value in frame.items():
            yield (scope, name), value


# -- scope ancestry ---------------------------------------------------------


def base_of(kappa: DefEnv, scope: S.Scope) -> S.Scope:
    """The top or node scope that ``scope`` ultimately hangs from."""
    seen = set()
    while True:
        if isinstance(scope, (S.TopScope, S.NodeScope)):
            return scope
        if isinstance(scope, S.DefScope):
            scope = scope.inner
            continue
        d = kappa.get(scope.name)
        if not isinstance(d, DeclaredClass) or scope.name in seen:
            raise UndefinedParent(f"class {scope.name} is not declared")
        seen.add(scope.name)
        scope = d.scope


def parent_of(kappa: DefEnv, scope: S.Scope) -> S.Scope:
    """Parent scope for unqualified variable lookup. The top scope has none."""
    if isinstance(scope, S.NodeScope):
        return S.TOP
    if isinstance(scope, S.DefScope):
        return base_of(kappa, scope)
    if isinstance(scope, S.ClassScope):
        d = kappa.get(scope.name)
        if isinstance(d, DeclaredClass):
            return d.scope
        raise UndefinedParent(f"class {scope.name} is not declared")
    raise UndefinedParent("the top scope has no parent")


def resolve_variable(sigma: VarEnv, kappa: DefEnv, scope: S.Scope, name: str):
    """Walk the parent chain from ``scope``; returns (value, scopes visited)."""
    chain = [scope]
    while True:
        if env_has(sigma, scope, name):
            return env_get(sigma, scope, name), chain
        if isinstance(scope, S.TopScope):
            return None, chain
        scope = parent_of(kappa, scope)
        chain.append(scope)


# -- merge ------------------------------------------------------------------


def merge_params(params: S.Params, entries, pos=None) -> list:
    """Assignments binding each parameter to its override or default.

    Returns the list of statements; the caller terminates it with ``skip``.
    Defaults stay unevaluated expressions.
    """
    names = {p.name for p in params}
    for key, _ in entries:
        if key not in names:
            raise UnknownParameterError(str(key), pos)
    out = []
    for p in params:
        v = hash_lookup(p.name, entries)
        if v is not None:
            out.append(S.Assign(p.name, v, pos=p.pos))
        elif p.default is not None:
            out.append(S.Assign(p.name, p.default, pos=p.pos))
        else:
            raise MissingParameterError(p.name, pos)
    return out


def lookup_definition(kappa: DefEnv, name: str, pos=None):
    d = kappa.get(name)
    if d is None:
        raise CompileError(ErrorKind.UndefinedDefinition, f"no class or defined type named {name!r}", pos)
    return d
