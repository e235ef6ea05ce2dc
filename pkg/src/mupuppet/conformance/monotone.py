"""Ordering checks on consecutive (σ, κ, catalog) states.

σ ⊑ σ′: each binding keeps its value, except that def-scope bindings may
disappear. κ ⊑ κ′: each entry is unchanged or goes from a class definition
to a declared class. catalog ⊑ catalog′: prefix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

from .. import syntax as S
from ..environments import ClassDefinition, DeclaredClass, env_items
from ..values import is_prefix


@dataclass(frozen=True)
class Violation:
    step: int  # index of the later state
    component: str  # "sigma" | "kappa" | "catalog"
    detail: str


def sigma_leq(s1, s2) -> List[str]:
    if s1 is s2:
        return []
    bad = []
    for (scope, name), v in env_items(s1):
        frame = s2.get(scope)
        if frame is not None and name in frame:
            if frame[name] != v:
                bad.append(f"${name} in {scope} changed")
        elif not isinstance(scope, S.DefScope):
            bad.append(f"${name} in {scope} vanished")
    return bad


def kappa_leq(k1, k2) -> List[str]:
    if k1 is k2:
        return []
    bad = []
    for name, d in k1.items():
        d2 = k2.get(name)
        if d2 == d:
            continue
        if isinstance(d, ClassDefinition) and isinstance(d2, DeclaredClass):
            continue
        bad.append(f"definition {name!r} went from {type(d).__name__} to {type(d2).__name__}")
    return bad


def catalog_leq(c1, c2) -> List[str]:
    if c1 is c2 or is_prefix(c1, c2):
        return []
    return ["catalog is not an extension of its predecessor"]


def check_monotone(states: Sequence[Tuple[object, object, object]]) -> List[Violation]:
    """Violations of ⊑ between consecutive states; empty means monotone."""
    out: List[Violation] = []
    for i in range(1, len(states)):
        (s1, k1, c1), (s2, k2, c2) = states[i - 1], states[i]
        out += [Violation(i, "sigma", d) for d in sigma_leq(s1, s2)]
        out += [Violation(i, "kappa", d) for d in kappa_leq(k1, k2)]
        out += [Violation(i, "catalog", d) for d in catalog_leq(c1, c2)]
    return out
