"""Abstract syntax for manifests, statements and expressions.

Every node is a frozen dataclass. Source positions ride along on each node
but take no part in equality or hashing, so two trees parsed from differently
formatted text compare equal.

Besides the source forms, two internal statement forms exist that the
evaluator introduces on its own: ``ScopeStmt`` (run a body under another
scope) and ``Skip`` (the finished statement). The parser never emits a
``ScopeStmt``; ``Skip`` only shows up as the body of an empty block.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


@dataclass(frozen=True)
class Node:
    pos: Optional[Pos] = field(default=None, compare=False, repr=False, kw_only=True)


# --------------------------------------------------------------------------
# Scopes. These belong to the runtime, but `scope α s` embeds one in a term.
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TopScope:
    def __str__(self) -> str:
        return "::"


@dataclass(frozen=True)
class NodeScope:
    def __str__(self) -> str:
        return "::nd"


@dataclass(frozen=True)
class ClassScope:
    name: str

    def __str__(self) -> str:
        return f"::{self.name}"


@dataclass(frozen=True)
class DefScope:
    inner: "Scope"

    def __str__(self) -> str:
        return f"def({self.inner})"


Scope = Union[TopScope, NodeScope, ClassScope, DefScope]

TOP = TopScope()
NODE = NodeScope()


# --------------------------------------------------------------------------
# Expressions
# --------------------------------------------------------------------------

ARITH_OPS = ("+", "-", "*", "/", "%")
ORDER_OPS = (">", "<", ">=", "<=")
EQUALITY_OPS = ("==", "!=")
COMPARISON_OPS = ORDER_OPS + EQUALITY_OPS
BOOL_OPS = ("and", "or")
BINARY_OPS = ARITH_OPS + COMPARISON_OPS + BOOL_OPS


@dataclass(frozen=True)
class IntLit(Node):
    value: int


@dataclass(frozen=True)
class StrLit(Node):
    value: str


@dataclass(frozen=True)
class BoolLit(Node):
    value: bool


@dataclass(frozen=True)
class Var(Node):
    """``$x``: resolved through the ambient scope and its parents."""

    name: str


@dataclass(frozen=True)
class TopVar(Node):
    """``$::x``"""

    name: str


@dataclass(frozen=True)
class QualVar(Node):
    """``$a::b::x`` or ``$::a::b::x``; ``cls`` is ``"a::b"``."""

    cls: str
    name: str


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Not(Node):
    operand: "Expression"


@dataclass(frozen=True)
class ArrayExpr(Node):
    items: Tuple["Expression", ...]


HashKey = Union[int, str]


@dataclass(frozen=True)
class HashExpr(Node):
    entries: Tuple[Tuple[HashKey, "Expression"], ...]


@dataclass(frozen=True)
class Deref(Node):
    """``target[index]`` on an array, hash or resource reference."""

    target: "Expression"
    index: "Expression"


@dataclass(frozen=True)
class ResourceRef(Node):
    """``File[title]``; ``type`` is stored lowercased."""

    type: str
    title: "Expression"


class _Default:
    """The ``default`` case label."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "DEFAULT"

    def __reduce__(self):
        return (_Default, ())


DEFAULT = _Default()

Case = Union["Expression", _Default]


@dataclass(frozen=True)
class Selector(Node):
    subject: "Expression"
    arms: Tuple[Tuple[Case, "Expression"], ...]


Expression = Union[
    IntLit, StrLit, BoolLit, Var, TopVar, QualVar, BinOp, Not,
    ArrayExpr, HashExpr, Deref, ResourceRef, Selector,
]
EXPRESSION_TYPES = (
    IntLit, StrLit, BoolLit, Var, TopVar, QualVar, BinOp, Not,
    ArrayExpr, HashExpr, Deref, ResourceRef, Selector,
)


# --------------------------------------------------------------------------
# Statements
# --------------------------------------------------------------------------

Attrs = Tuple[Tuple[str, "Expression"], ...]


@dataclass(frozen=True)
class Seq(Node):
    first: "Statement"
    rest: "Statement"


@dataclass(frozen=True)
class Assign(Node):
    name: str
    value: "Expression"


@dataclass(frozen=True)
class Unless(Node):
    cond: "Expression"
    body: "Statement"


@dataclass(frozen=True)
class IfElse(Node):
    cond: "Expression"
    then: "Statement"
    orelse: "Statement"


@dataclass(frozen=True)
class CaseStmt(Node):
    subject: "Expression"
    arms: Tuple[Tuple[Case, "Statement"], ...]


@dataclass(frozen=True)
class ResourceDecl(Node):
    """``word { title: attrs }``.

    Whether ``type`` names a built-in resource type or a defined one is
    decided by the evaluator against its configured built-in set.
    """

    type: str
    title: "Expression"
    attrs: Attrs


@dataclass(frozen=True)
class ClassDecl(Node):
    """Resource-like class declaration ``class { name: attrs }``."""

    name: str
    attrs: Attrs


@dataclass(frozen=True)
class Include(Node):
    name: str


@dataclass(frozen=True)
class Fail(Node):
    """``fail(message)``: always aborts compilation once its message is a value."""

    message: "Expression"


@dataclass(frozen=True)
class ScopeStmt(Node):
    scope: Scope
    body: "Statement"


@dataclass(frozen=True)
class Skip(Node):
    pass


SKIP = Skip()

Statement = Union[
    Expression, Seq, Assign, Unless, IfElse, CaseStmt, ResourceDecl,
    ClassDecl, Include, Fail, ScopeStmt, Skip,
]
STATEMENT_TYPES = EXPRESSION_TYPES + (
    Seq, Assign, Unless, IfElse, CaseStmt, ResourceDecl,
    ClassDecl, Include, Fail, ScopeStmt, Skip,
)


# --------------------------------------------------------------------------
# Manifests
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Param(Node):
    name: str
    default: Optional["Expression"] = None


Params = Tuple[Param, ...]


@dataclass(frozen=True)
class NodeName(Node):
    name: str


@dataclass(frozen=True)
class NodeDefault(Node):
    pass


@dataclass(frozen=True)
class NodeList(Node):
    names: Tuple[str, ...]

    def __post_init__(self):
        if not self.names:
            raise ValueError("node list must be nonempty")


NodeSpec = Union[NodeName, NodeDefault, NodeList]


@dataclass(frozen=True)
class MSeq(Node):
    first: "Manifest"
    rest: "Manifest"


@dataclass(frozen=True)
class NodeDef(Node):
    spec: NodeSpec
    body: Statement


@dataclass(frozen=True)
class DefineDef(Node):
    name: str
    params: Params
    body: Statement


@dataclass(frozen=True)
class ClassDef(Node):
    """``class a [(params)] [inherits b] { body }``.

    ``params is None`` means the parameter list was omitted entirely, which
    keeps the four definition forms apart.
    """

    name: str
    params: Optional[Params]
    parent: Optional[str]
    body: Statement


Manifest = Union[Statement, MSeq, NodeDef, DefineDef, ClassDef]
MANIFEST_ONLY_TYPES = (MSeq, NodeDef, DefineDef, ClassDef)


def seq(stmts) -> Statement:
    """Right-associated sequence of statements; empty gives ``skip``."""
    stmts = list(stmts)
    if not stmts:
        return SKIP
    result = stmts[-1]
    for s in reversed(stmts[:-1]):
        result = Seq(s, result, pos=s.pos)
    return result


def mseq(items) -> Manifest:
    items = list(items)
    if not items:
        return SKIP
    result = items[-1]
    for m in reversed(items[:-1]):
        result = MSeq(m, result, pos=m.pos)
    return result


def flatten_seq(s: Statement) -> list:
    out = []
    while isinstance(s, Seq):
        out.append(s.first)
        s = s.rest
    out.append(s)
    return out


def flatten_mseq(m: Manifest) -> list:
    out = []
    while isinstance(m, MSeq):
        out.append(m.first)
        m = m.rest
    out.append(m)
    return out


BUILTIN_TYPES = frozenset(
    {"file", "package", "service", "user", "exec", "group", "host", "notify"}
)
