"""Fully evaluated data: values, resource values and catalogs.

Values reuse the expression node classes. An expression is a value when it
is a literal, or an array, hash or resource reference whose parts are all
values (``is_value``). A catalog is a plain tuple of ``ResourceValue``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

from . import syntax as S
from .errors import DuplicateResourceError

ABSENT = None  # lookups return None for "no such binding"


def is_value(e) -> bool:
    if isinstance(e, (S.IntLit, S.StrLit, S.BoolLit)):
        return True
    if isinstance(e, S.ArrayExpr):
        return all(is_value(i) for i in e.items)
    if isinstance(e, S.HashExpr):
        return all(is_value(v) for _, v in e.entries)
    if isinstance(e, S.ResourceRef):
        return is_value(e.title)
    return False


def from_python(obj) -> S.Expression:
    """The value denoted by plain data: int, str, bool, list, or dict with scalar keys."""
    if isinstance(obj, bool):
        return S.BoolLit(obj)
    if isinstance(obj, int):
        return S.IntLit(obj)
    if isinstance(obj, str):
        return S.StrLit(obj)
    if isinstance(obj, (list, tuple)):
        return S.ArrayExpr(tuple(from_python(x) for x in obj))
    if isinstance(obj, dict):
        if not all(is_scalar_key(k) for k in obj):
            raise ValueError("hash keys must be integers or strings")
        return S.HashExpr(tuple((k, from_python(v)) for k, v in obj.items()))
    raise ValueError(f"no value for {type(obj).__name__}")


def is_scalar_key(k) -> bool:
    return isinstance(k, (int, str)) and not isinstance(k, bool)


def key_of(v) -> Optional[S.HashKey]:
    """Hash key denoted by a value, or None if the value is not a scalar."""
    if isinstance(v, (S.IntLit, S.StrLit)):
        return v.value
    return None


def hash_lookup(k, entries):
    """First value bound to ``k`` in ``entries``, or None."""
    for key, value in entries:
        if key == k and type(key) is type(k):
            return value
    return ABSENT


@dataclass(frozen=True)
class ResourceValue:
    type: str
    title: str
    attrs: Tuple[Tuple[str, S.Expression], ...]
    pos: Optional[S.Pos] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.title, str):
            raise TypeError("resource title must be a string")
        names = [n for n, _ in self.attrs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate attribute in {self.type}[{self.title!r}]")

    @property
    def key(self) -> Tuple[str, str]:
        return (self.type, self.title)


Catalog = Tuple[ResourceValue, ...]
EMPTY_CATALOG: Catalog = ()


def catalog_find(catalog: Catalog, type_name: str, title: str) -> Optional[ResourceValue]:
    for r in catalog:
        if r.type == type_name and r.title == title:
            return r
    return None


def catalog_lookup(catalog: Catalog, type_name: str, title: str, k):
    """Attribute ``k`` of resource ``type_name[title]``, or None."""
    r = catalog_find(catalog, type_name, title)
    if r is None:
        return ABSENT
    return hash_lookup(k, r.attrs)


def catalog_append(catalog: Catalog, resource: ResourceValue) -> Catalog:
    prior = catalog_find(catalog, resource.type, resource.title)
    if prior is not None:
        raise DuplicateResourceError(resource.type, resource.title, prior.pos, resource.pos)
    return catalog + (resource,)


def is_prefix(shorter: Catalog, longer: Catalog) -> bool:
    return len(shorter) <= len(longer) and longer[: len(shorter)] == shorter
