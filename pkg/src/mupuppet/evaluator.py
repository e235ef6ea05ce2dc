"""Small-step evaluation of expressions, statements and manifests.

Each step is found by decomposing the current term into a stack of
congruence frames (``SeqStep``, ``ArithLeft``, ``ScopeStep``...) ending at a
redex, whose axiom-like rule is then applied. The driver keeps the frame
stack between steps and only re-examines the part of the term that changed,
so a step costs amortized constant time even when the term grows deep (as it
does under unchecked inheritance cycles).

A configuration that is neither finished nor able to step raises
``CompileError``; its kind says why the rules are stuck.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

from . import syntax as S
from .environments import (
    EMPTY_DEFS,
    ClassDefinition,
    DeclaredClass,
    DefEnv,
    ResourceDefinition,
    UndefinedParent,
    VarEnv,
    base_of,
    env_clear,
    env_from_facts,
    env_get,
    env_has,
    env_update,
    merge_params,
    parent_of,
)
from .errors import CompileError, ErrorKind
from .printer import summary
from .values import (
    EMPTY_CATALOG,
    Catalog,
    ResourceValue,
    catalog_append,
    catalog_lookup,
    hash_lookup,
    is_value,
    key_of,
)

EXPR = "EXPR"
STMT = "STMT"
MANIFEST = "MANIFEST"

Context = Union[S.Scope, str]  # ambient scope, or node name for manifests


@dataclass(frozen=True)
class Limits:
    max_steps: int = 10**6
    paper_divergence: bool = False


@dataclass(frozen=True)
class Configuration:
    sigma: VarEnv
    kappa: DefEnv
    catalog: Catalog
    term: object
    context: Context

    @property
    def judgement(self) -> str:
        return judgement_of(self.term, self.context)


def judgement_of(term, context: Context) -> str:
    if isinstance(context, str):
        return MANIFEST
    if isinstance(term, S.EXPRESSION_TYPES):
        return EXPR
    return STMT


@dataclass(frozen=True)
class TraceRecord:
    index: int
    judgement: str
    rule: str
    path: Tuple[str, ...]
    scope: Optional[str]
    term: str

    def to_json(self) -> dict:
        return {
            "step": self.index,
            "judgement": self.judgement,
            "rule": self.rule,
            "path": list(self.path),
            "scope": self.scope,
            "term": self.term,
        }


@dataclass
class Trace:
    records: List[TraceRecord] = field(default_factory=list)
    # (σ, κ, catalog) before step 1 and after every step, when requested
    states: List[Tuple[VarEnv, DefEnv, Catalog]] = field(default_factory=list)


@dataclass
class Result:
    catalog: Catalog
    sigma: VarEnv
    kappa: DefEnv
    steps: int
    trace: Optional[Trace] = None


# --------------------------------------------------------------------------
# predicates
# --------------------------------------------------------------------------


def case_match(v, c) -> bool:
    if c is S.DEFAULT:
        return True
    return v == c


def node_match(name: str, spec: S.NodeSpec) -> bool:
    if isinstance(spec, S.NodeDefault):
        return True
    if isinstance(spec, S.NodeName):
        return spec.name == name
    return name in spec.names


# --------------------------------------------------------------------------
# decomposition results
# --------------------------------------------------------------------------


@dataclass
class Descend:
    rules: Tuple[str, ...]
    child: object
    context: Context
    plug: Callable[[object], object]
    judgement: str = EXPR


@dataclass
class Redex:
    rules: Tuple[str, ...]
    sigma: VarEnv
    kappa: DefEnv
    catalog: Catalog
    term: object


def _stuck(kind: ErrorKind, msg: str, term=None) -> CompileError:
    return CompileError(kind, msg, getattr(term, "pos", None))


def _describe(v) -> str:
    return summary(v, 40)


def _kind_name(v) -> str:
    return {
        S.IntLit: "an integer",
        S.StrLit: "a string",
        S.BoolLit: "a boolean",
        S.ArrayExpr: "an array",
        S.HashExpr: "a hash",
        S.ResourceRef: "a resource reference",
    }.get(type(v), "a value")


def _replace_at(items: tuple, i: int, new) -> tuple:
    return items[:i] + (new,) + items[i + 1 :]


def _first_non_value(values: Sequence) -> int:
    for i, v in enumerate(values):
        if not is_value(v):
            return i
    return -1


class Machine:
    def __init__(self, builtin_types: Iterable[str] = S.BUILTIN_TYPES, limits: Limits = Limits()):
        self.builtin_types = frozenset(builtin_types)
        self.limits = limits

    # ------------------------------------------------------------------
    # analysis: normal form (None), Descend, or Redex
    # ------------------------------------------------------------------

    def analyze(self, judgement: str, term, ctx: Context, sigma, kappa, catalog):
        if judgement == MANIFEST:
            return self._manifest(term, ctx, sigma, kappa, catalog)
        if judgement == EXPR:
            return self._expr(term, ctx, sigma, kappa, catalog)
        return self._stmt(term, ctx, sigma, kappa, catalog)

    # -- expressions ----------------------------------------------------

    def _expr(self, e, a, sigma, kappa, catalog):
        def red(rules, new):
            return Redex(rules, sigma, kappa, catalog, new)

        if isinstance(e, (S.IntLit, S.StrLit, S.BoolLit)):
            return None

        if isinstance(e, S.Var):
            rules = []
            scope = a
            while True:
                if env_has(sigma, scope, e.name):
                    rules.append("LVar")
                    return red(tuple(rules), env_get(sigma, scope, e.name))
                if isinstance(scope, S.TopScope):
                    raise _stuck(ErrorKind.UndefinedVariable, f"unknown variable ${e.name}", e)
                try:
                    scope = parent_of(kappa, scope)
                except UndefinedParent as exc:
                    raise _stuck(ErrorKind.InternalStuck, str(exc), e)
                rules.append("PVar")

        if isinstance(e, S.TopVar):
            if env_has(sigma, S.TOP, e.name):
                return red(("TVar",), env_get(sigma, S.TOP, e.name))
            raise _stuck(ErrorKind.UndefinedVariable, f"unknown variable $::{e.name}", e)

        if isinstance(e, S.QualVar):
            scope = S.ClassScope(e.cls)
            if env_has(sigma, scope, e.name):
                return red(("QVar",), env_get(sigma, scope, e.name))
            raise _stuck(ErrorKind.UndefinedVariable, f"unknown variable $::{e.cls}::{e.name}", e)

        if isinstance(e, S.BinOp):
            return self._binop(e, a, red)

        if isinstance(e, S.Not):
            x = e.operand
            if not is_value(x):
                return Descend(("NotStep",), x, a, lambda c: S.Not(c, pos=e.pos))
            if isinstance(x, S.BoolLit):
                if x.value:
                    return red(("NotValueI",), S.BoolLit(False, pos=e.pos))
                return red(("NotValueII",), S.BoolLit(True, pos=e.pos))
            raise _stuck(ErrorKind.TypeMismatch, f"'!' expects a boolean, got {_kind_name(x)}", e)

        if isinstance(e, S.ArrayExpr):
            i = _first_non_value(e.items)
            if i < 0:
                return None
            rules = ("ArrExp",) + ("ArrEleI",) * i + ("ArrEleII",)
            return Descend(rules, e.items[i], a,
                           lambda c: S.ArrayExpr(_replace_at(e.items, i, c), pos=e.pos))

        if isinstance(e, S.HashExpr):
            i = _first_non_value([v for _, v in e.entries])
            if i < 0:
                return None
            rules = ("HaExp",) + ("HEleI",) * i + ("HEleII",)
            key = e.entries[i][0]
            return Descend(rules, e.entries[i][1], a,
                           lambda c: S.HashExpr(_replace_at(e.entries, i, (key, c)), pos=e.pos))

        if isinstance(e, S.ResourceRef):
            if is_value(e.title):
                return None
            return Descend(("RefRes",), e.title, a, lambda c: S.ResourceRef(e.type, c, pos=e.pos))

        if isinstance(e, S.Deref):
            return self._deref(e, a, catalog, red)

        if isinstance(e, S.Selector):
            if not is_value(e.subject):
                return Descend(("SControl",), e.subject, a,
                               lambda c: S.Selector(c, e.arms, pos=e.pos))
            if not e.arms:
                raise _stuck(ErrorKind.SelectorNoMatch,
                             f"no selector case matches {_describe(e.subject)}", e)
            (label, result), rest = e.arms[0], e.arms[1:]
            if label is S.DEFAULT:
                return red(("SDefault",), result)
            if not is_value(label):
                return Descend(("SCase",), label, a,
                               lambda c: S.Selector(e.subject, ((c, result),) + rest, pos=e.pos))
            if case_match(e.subject, label):
                return red(("SChooseI",), result)
            return red(("SChooseII",), S.Selector(e.subject, rest, pos=e.pos))

        raise _stuck(ErrorKind.InternalStuck, f"not an expression: {type(e).__name__}", e)

    def _binop(self, e: S.BinOp, a, red):
        op, l, r = e.op, e.left, e.right

        def rebuild(side):
            if side == "left":
                return lambda c: S.BinOp(op, c, r, pos=e.pos)
            return lambda c: S.BinOp(op, l, c, pos=e.pos)

        if op in S.ARITH_OPS:
            if not is_value(l):
                return Descend(("ArithLeft",), l, a, rebuild("left"))
            if not isinstance(l, S.IntLit):
                raise _stuck(ErrorKind.TypeMismatch,
                             f"'{op}' expects integers, got {_kind_name(l)} on the left", e)
            if not is_value(r):
                return Descend(("ArithRight",), r, a, rebuild("right"))
            if not isinstance(r, S.IntLit):
                raise _stuck(ErrorKind.TypeMismatch,
                             f"'{op}' expects integers, got {_kind_name(r)} on the right", e)
            return red(("ArithValue",), S.IntLit(_arith(op, l.value, r.value, e), pos=e.pos))

        if op in S.COMPARISON_OPS:
            if not is_value(l):
                return Descend(("CompLeft",), l, a, rebuild("left"))
            if not is_value(r):
                return Descend(("CompRight",), r, a, rebuild("right"))
            if op in S.ORDER_OPS:
                if not (isinstance(l, S.IntLit) and isinstance(r, S.IntLit)):
                    raise _stuck(ErrorKind.TypeMismatch,
                                 f"'{op}' compares integers only, got {_kind_name(l)} and {_kind_name(r)}", e)
                outcome = _compare(op, l.value, r.value)
            else:
                outcome = (l == r) == (op == "==")
            return red(("CompValueI",) if outcome else ("CompValueII",), S.BoolLit(outcome, pos=e.pos))

        # and / or
        is_and = op == "and"
        prefix = "And" if is_and else "Or"
        if not is_value(l):
            return Descend((prefix + "Left",), l, a, rebuild("left"))
        if not isinstance(l, S.BoolLit):
            raise _stuck(ErrorKind.TypeMismatch, f"'{op}' expects booleans, got {_kind_name(l)}", e)
        short = (not l.value) if is_and else l.value
        if short:
            return red((prefix + "RightI",), S.BoolLit(l.value, pos=e.pos))
        if not is_value(r):
            return Descend((prefix + "RightII",), r, a, rebuild("right"))
        if not isinstance(r, S.BoolLit):
            raise _stuck(ErrorKind.TypeMismatch, f"'{op}' expects booleans, got {_kind_name(r)}", e)
        if r.value == is_and:
            return red((prefix + "Value",), S.BoolLit(is_and, pos=e.pos))
        return red((prefix + "ValueII",), S.BoolLit(not is_and, pos=e.pos))

    def _deref(self, e: S.Deref, a, catalog, red):
        t, i = e.target, e.index
        if not is_value(t):
            return Descend(("DeRefExp",), t, a, lambda c: S.Deref(c, i, pos=e.pos))
        if not is_value(i):
            return Descend(("DeRefIndex",), i, a, lambda c: S.Deref(t, c, pos=e.pos))
        if isinstance(t, S.ArrayExpr):
            if not isinstance(i, S.IntLit):
                raise _stuck(ErrorKind.TypeMismatch, f"array index must be an integer, got {_kind_name(i)}", e)
            if not 0 <= i.value < len(t.items):
                raise _stuck(ErrorKind.BadDereference,
                             f"index {i.value} out of range for array of length {len(t.items)}", e)
            return red(("DeRefArray",), t.items[i.value])
        if isinstance(t, S.HashExpr):
            k = key_of(i)
            if k is None:
                raise _stuck(ErrorKind.TypeMismatch, f"hash key must be an integer or string, got {_kind_name(i)}", e)
            v = hash_lookup(k, t.entries)
            if v is None:
                raise _stuck(ErrorKind.BadDereference, f"hash has no key {_describe(i)}", e)
            return red(("DeRefHash",), v)
        if isinstance(t, S.ResourceRef):
            if not isinstance(t.title, S.StrLit) or not isinstance(i, S.StrLit):
                raise _stuck(ErrorKind.BadDereference,
                             "a resource reference is indexed by an attribute name on a string title", e)
            v = catalog_lookup(catalog, t.type, t.title.value, i.value)
            if v is None:
                raise _stuck(ErrorKind.BadDereference,
                             f"catalog has no attribute {i.value!r} for {_describe(t)}", e)
            return red(("DeRefRes",), v)
        raise _stuck(ErrorKind.TypeMismatch, f"cannot index {_kind_name(t)}", e)

    # -- resource bodies -------------------------------------------------

    def _body(self, title, attrs, a, rebuild):
        """Step inside ``title : attrs``; None when fully evaluated."""
        if not is_value(title):
            return Descend(("ResTitle",), title, a, lambda c: rebuild(c, attrs))
        d = self._hash(attrs, a, lambda h: rebuild(title, h))
        if d is None:
            return None
        d.rules = ("ResStepI",) + d.rules
        return d

    def _hash(self, attrs, a, rebuild):
        i = _first_non_value([v for _, v in attrs])
        if i < 0:
            return None
        name = attrs[i][0]
        return Descend(("ResStepIII",) * i + ("ResStepII",), attrs[i][1], a,
                       lambda c: rebuild(_replace_at(attrs, i, (name, c))))

    # -- statements -------------------------------------------------------

    def _stmt(self, s, a, sigma, kappa, catalog):
        def red(rules, new, sigma=sigma, kappa=kappa, catalog=catalog):
            return Redex(rules, sigma, kappa, catalog, new)

        if isinstance(s, S.Skip):
            return None

        if isinstance(s, S.EXPRESSION_TYPES):
            if is_value(s):
                return red(("Expr",), S.Skip(pos=s.pos))
            return Descend(("ExprStep",), s, a, _identity)

        if isinstance(s, S.Seq):
            if isinstance(s.first, S.Skip):
                return red(("SeqSkip",), s.rest)
            return Descend(("SeqStep",), s.first, a, lambda c: S.Seq(c, s.rest, pos=s.pos), STMT)

        if isinstance(s, S.Assign):
            if not is_value(s.value):
                return Descend(("AssignStep",), s.value, a, lambda c: S.Assign(s.name, c, pos=s.pos))
            return red(("Assign",), S.Skip(pos=s.pos),
                       sigma=env_update(sigma, a, s.name, s.value, s.pos))

        if isinstance(s, S.IfElse):
            c = s.cond
            if not is_value(c):
                return Descend(("IfStep",), c, a, lambda x: S.IfElse(x, s.then, s.orelse, pos=s.pos))
            if isinstance(c, S.BoolLit):
                return red(("IfT",), s.then) if c.value else red(("IfF",), s.orelse)
            raise _stuck(ErrorKind.TypeMismatch, f"'if' condition must be a boolean, got {_kind_name(c)}", s)

        if isinstance(s, S.Unless):
            c = s.cond
            if not is_value(c):
                return Descend(("UnlessStep",), c, a, lambda x: S.Unless(x, s.body, pos=s.pos))
            if isinstance(c, S.BoolLit):
                return red(("UnlessT",), S.Skip(pos=s.pos)) if c.value else red(("UnlessF",), s.body)
            raise _stuck(ErrorKind.TypeMismatch, f"'unless' condition must be a boolean, got {_kind_name(c)}", s)

        if isinstance(s, S.CaseStmt):
            subj = s.subject
            if not is_value(subj):
                return Descend(("CaseStep1",), subj, a, lambda x: S.CaseStmt(x, s.arms, pos=s.pos))
            if not s.arms:
                return red(("CaseDone",), S.Skip(pos=s.pos))
            (label, body), rest = s.arms[0], s.arms[1:]
            if label is not S.DEFAULT and not is_value(label):
                return Descend(("CaseStep2",), label, a,
                               lambda x: S.CaseStmt(subj, ((x, body),) + rest, pos=s.pos))
            if case_match(subj, label):
                return red(("CaseMatch",), body)
            return red(("CaseNoMatch",), S.CaseStmt(subj, rest, pos=s.pos))

        if isinstance(s, S.ResourceDecl):
            return self._resource_decl(s, a, sigma, kappa, catalog, red)

        if isinstance(s, S.ClassDecl):
            return self._class_decl(s, a, kappa, red)

        if isinstance(s, S.Include):
            return self._include(s, a, kappa, red)

        if isinstance(s, S.Fail):
            if not is_value(s.message):
                return Descend(("FailStep",), s.message, a, lambda x: S.Fail(x, pos=s.pos))
            text = s.message.value if isinstance(s.message, S.StrLit) else summary(s.message)
            raise _stuck(ErrorKind.ExplicitFailure, text, s)

        if isinstance(s, S.ScopeStmt):
            inner = s.scope
            if isinstance(inner, S.DefScope):
                if inner.inner != a:
                    raise _stuck(ErrorKind.InternalStuck,
                                 f"scope {inner} reached under ambient scope {a}", s)
                if isinstance(s.body, S.Skip):
                    return red(("DefScopeDone",), S.Skip(pos=s.pos), sigma=env_clear(sigma, inner))
                return Descend(("DefScopeStep",), s.body, inner,
                               lambda x: S.ScopeStmt(inner, x, pos=s.pos), STMT)
            if isinstance(s.body, S.Skip):
                return red(("ScopeDone",), S.Skip(pos=s.pos))
            return Descend(("ScopeStep",), s.body, inner, lambda x: S.ScopeStmt(inner, x, pos=s.pos), STMT)

        raise _stuck(ErrorKind.InternalStuck, f"not a statement: {type(s).__name__}", s)

    def _resource_decl(self, s: S.ResourceDecl, a, sigma, kappa, catalog, red):
        builtin = s.type in self.builtin_types
        d = self._body(s.title, s.attrs, a,
                       lambda t, h: S.ResourceDecl(s.type, t, h, pos=s.pos))
        if d is not None:
            d.rules = ("ResStep" if builtin else "DefStep",) + d.rules
            return d
        if not isinstance(s.title, S.StrLit):
            raise _stuck(ErrorKind.TypeMismatch,
                         f"resource title must be a string, got {_kind_name(s.title)}", s)
        title = s.title.value
        if builtin:
            resource = ResourceValue(s.type, title, s.attrs, s.pos)
            return red(("ResDecl",), S.Skip(pos=s.pos), catalog=catalog_append(catalog, resource))
        definition = kappa.get(s.type)
        if not isinstance(definition, ResourceDefinition):
            raise _stuck(ErrorKind.UndefinedDefinition,
                         f"unknown resource type {s.type!r}" if definition is None
                         else f"{s.type!r} is a class, not a defined resource type", s)
        inits = merge_params(definition.params, s.attrs, s.pos)
        scope = S.DefScope(a)
        body = S.seq([S.Assign("title", S.StrLit(title, pos=s.pos), pos=s.pos), *inits,
                      S.Skip(pos=s.pos), definition.body])
        return red(("Def",), S.ScopeStmt(scope, body, pos=s.pos))

    def _class_body(self, name, params, entries, body, pos):
        inits = merge_params(params, entries, pos)
        return S.ScopeStmt(S.ClassScope(name), S.seq([*inits, S.Skip(pos=pos), body]), pos=pos)

    def _base(self, kappa, a, term):
        try:
            return base_of(kappa, a)
        except UndefinedParent as exc:
            raise _stuck(ErrorKind.InternalStuck, str(exc), term)

    def _check_cycle(self, kappa, name, term):
        if self.limits.paper_divergence:
            return
        seen = [name]
        d = kappa.get(name)
        while isinstance(d, ClassDefinition) and d.parent is not None:
            if d.parent in seen:
                chain = " -> ".join(seen + [d.parent])
                raise _stuck(ErrorKind.InheritanceCycle, f"inheritance cycle: {chain}", term)
            seen.append(d.parent)
            d = kappa.get(d.parent)

    def _parent_definition(self, kappa, d: ClassDefinition, name, term):
        pd = kappa.get(d.parent)
        if isinstance(pd, (ClassDefinition, DeclaredClass)):
            return pd
        raise _stuck(ErrorKind.UndefinedDefinition,
                     f"class {name!r} inherits unknown class {d.parent!r}", term)

    def _include(self, s: S.Include, a, kappa, red):
        d = kappa.get(s.name)
        if isinstance(d, DeclaredClass):
            return red(("IncD",), S.Skip(pos=s.pos))
        if not isinstance(d, ClassDefinition):
            raise _stuck(ErrorKind.UndefinedDefinition,
                         f"unknown class {s.name!r}" if d is None
                         else f"{s.name!r} is a defined resource type, not a class", s)
        if d.parent is None:
            beta = self._base(kappa, a, s)
            return red(("IncU",), self._class_body(s.name, d.params, (), d.body, s.pos),
                       kappa=kappa.set(s.name, DeclaredClass(beta)))
        pd = self._parent_definition(kappa, d, s.name, s)
        if isinstance(pd, ClassDefinition):
            self._check_cycle(kappa, s.name, s)
            return red(("IncPU",), S.Seq(S.Include(d.parent, pos=s.pos), s, pos=s.pos))
        return red(("IncPD",), self._class_body(s.name, d.params, (), d.body, s.pos),
                   kappa=kappa.set(s.name, DeclaredClass(S.ClassScope(d.parent))))

    def _class_decl(self, s: S.ClassDecl, a, kappa, red):
        d = kappa.get(s.name)
        if isinstance(d, DeclaredClass):
            raise _stuck(ErrorKind.ClassAlreadyDeclared, f"class {s.name!r} is already declared", s)
        if not isinstance(d, ClassDefinition):
            raise _stuck(ErrorKind.UndefinedDefinition,
                         f"unknown class {s.name!r}" if d is None
                         else f"{s.name!r} is a defined resource type, not a class", s)
        step = self._hash(s.attrs, a, lambda h: S.ClassDecl(s.name, h, pos=s.pos))
        if step is not None:
            step.rules = ("CDecStep",) + step.rules
            return step
        if d.parent is None:
            beta = self._base(kappa, a, s)
            return red(("CDecU",), self._class_body(s.name, d.params, s.attrs, d.body, s.pos),
                       kappa=kappa.set(s.name, DeclaredClass(beta)))
        pd = self._parent_definition(kappa, d, s.name, s)
        if isinstance(pd, ClassDefinition):
            self._check_cycle(kappa, s.name, s)
            return red(("CDecPU",), S.Seq(S.Include(d.parent, pos=s.pos), s, pos=s.pos))
        return red(("CDecPD",), self._class_body(s.name, d.params, s.attrs, d.body, s.pos),
                   kappa=kappa.set(s.name, DeclaredClass(S.ClassScope(d.parent))))

    # -- manifests --------------------------------------------------------

    def _manifest(self, m, node, sigma, kappa, catalog):
        def red(rules, new, kappa=kappa):
            return Redex(rules, sigma, kappa, catalog, new)

        if isinstance(m, S.Skip):
            return None
        if isinstance(m, S.MSeq):
            if isinstance(m.first, S.Skip):
                return red(("MSeqSkip",), m.rest)
            return Descend(("MSeqStep",), m.first, node, lambda c: S.MSeq(c, m.rest, pos=m.pos), MANIFEST)
        if isinstance(m, S.NodeDef):
            if node_match(node, m.spec):
                return red(("NodeMatch",), S.ScopeStmt(S.NODE, m.body, pos=m.pos))
            return red(("NodeNoMatch",), S.Skip(pos=m.pos))
        if isinstance(m, S.DefineDef):
            self._fresh(kappa, m.name, m)
            return red(("RDef",), S.Skip(pos=m.pos),
                       kappa=kappa.set(m.name, ResourceDefinition(m.params, m.body)))
        if isinstance(m, S.ClassDef):
            self._fresh(kappa, m.name, m)
            rule = {(False, False): "CDef", (False, True): "CDefI",
                    (True, False): "CDefP", (True, True): "CDefPI"}[
                (m.params is not None, m.parent is not None)]
            definition = ClassDefinition(m.parent, m.params or (), m.body)
            return red((rule,), S.Skip(pos=m.pos), kappa=kappa.set(m.name, definition))
        return Descend(("TopScope",), m, S.TOP, _identity, STMT)

    def _fresh(self, kappa, name, m):
        if name in kappa:
            raise _stuck(ErrorKind.DuplicateDefinition, f"{name!r} is already defined", m)


def _identity(x):
    return x


def _arith(op, x, y, e):
    if op == "+":
        return x + y
    if op == "-":
        return x - y
    if op == "*":
        return x * y
    if y == 0:
        raise _stuck(ErrorKind.DivisionByZero, f"'{op}' by zero", e)
    return x // y if op == "/" else x % y


def _compare(op, x, y) -> bool:
    return {">": x > y, "<": x < y, ">=": x >= y, "<=": x <= y}[op]


# --------------------------------------------------------------------------
# the zipper driver
# --------------------------------------------------------------------------


class _Frame:
    __slots__ = ("rules", "plug", "ctx", "judg", "pos")

    def __init__(self, rules, plug, ctx, judg, pos):
        self.rules = rules
        self.plug = plug
        self.ctx = ctx
        self.judg = judg
        self.pos = pos


class Stepper:
    """Iterates single steps over one configuration, keeping its focus."""

    def __init__(self, machine: Machine, config: Configuration, judgement: Optional[str] = None):
        self.m = machine
        self.sigma = config.sigma
        self.kappa = config.kappa
        self.catalog = config.catalog
        self.focus = config.term
        self.ctx = config.context
        self.judg = judgement or judgement_of(config.term, config.context)
        self.stack: List[_Frame] = []

    def _analyze(self):
        return self.m.analyze(self.judg, self.focus, self.ctx, self.sigma, self.kappa, self.catalog)

    def root(self):
        term = self.focus
        for frame in reversed(self.stack):
            term = frame.plug(term)
        return term

    def root_context(self):
        return self.stack[0].ctx if self.stack else self.ctx

    def configuration(self) -> Configuration:
        return Configuration(self.sigma, self.kappa, self.catalog, self.root(), self.root_context())

    def path(self, leaf: Tuple[str, ...]) -> Tuple[str, ...]:
        out: list = []
        for frame in self.stack:
            out.extend(frame.rules)
        out.extend(leaf)
        return tuple(out)

    def find_redex(self) -> Optional[Redex]:
        """Move the focus to the next redex; None when the whole term is normal."""
        while True:
            try:
                r = self._analyze()
            except CompileError as err:
                raise self._locate(err)
            if r is None:
                if not self.stack:
                    return None
                frame = self.stack.pop()
                self.focus = frame.plug(self.focus)
                self.ctx = frame.ctx
                self.judg = frame.judg
                continue
            if isinstance(r, Descend):
                self.stack.append(_Frame(r.rules, r.plug, self.ctx, self.judg, getattr(self.focus, "pos", None)))
                self.focus = r.child
                self.ctx = r.context
                self.judg = r.judgement
                continue
            return r

    def apply(self, r: Redex):
        self.sigma, self.kappa, self.catalog = r.sigma, r.kappa, r.catalog
        self.focus = r.term

    def _locate(self, err: CompileError) -> CompileError:
        pos = getattr(self.focus, "pos", None)
        for frame in reversed(self.stack):
            if pos is not None:
                break
            pos = frame.pos
        scope = self.ctx if not isinstance(self.ctx, str) else None
        return err.located(pos, scope)


def initial(manifest, node: str, facts=()) -> Configuration:
    return Configuration(env_from_facts(facts), EMPTY_DEFS, EMPTY_CATALOG, manifest, node)


def compile(
    manifest,
    node: str,
    facts: Sequence[Tuple[str, object]] = (),
    limits: Limits = Limits(),
    builtin_types: Iterable[str] = S.BUILTIN_TYPES,
    trace: bool = False,
    keep_states: bool = False,
    on_step: Optional[Callable[[Configuration, Tuple[str, ...]], None]] = None,
) -> Result:
    """Run the manifest judgement for ``node`` until the term is ``skip``."""
    st = Stepper(Machine(builtin_types, limits), initial(manifest, node, facts))
    log = Trace() if (trace or keep_states) else None
    if log is not None and keep_states:
        log.states.append((st.sigma, st.kappa, st.catalog))
    steps = 0
    try:
        while True:
            r = st.find_redex()
            if r is None:
                break
            if steps >= limits.max_steps:
                raise st._locate(CompileError(
                    ErrorKind.StepLimitExceeded, f"no result after {limits.max_steps} steps"))
            if on_step is not None:
                on_step(st.configuration(), st.path(r.rules))
            if trace:
                scope = None if isinstance(st.ctx, str) else str(st.ctx)
                log.records.append(TraceRecord(steps + 1, st.judg, r.rules[0], st.path(r.rules),
                                               scope, summary(st.focus)))
            st.apply(r)
            steps += 1
            if keep_states:
                log.states.append((st.sigma, st.kappa, st.catalog))
    except CompileError as err:
        err.trace = log  # the steps taken before getting stuck
        raise
    return Result(st.catalog, st.sigma, st.kappa, steps, log)


# --------------------------------------------------------------------------
# single steps from the root
# --------------------------------------------------------------------------


def step(config: Configuration, builtin_types: Iterable[str] = S.BUILTIN_TYPES,
         limits: Limits = Limits(), judgement: Optional[str] = None):
    """One step of ``config``'s judgement.

    Returns ``(Configuration, path)``, or None when the term is a normal form.
    Raises CompileError when the configuration is stuck. ``judgement`` picks
    STMT for an expression term used as a statement.
    """
    st = Stepper(Machine(builtin_types, limits), config, judgement)
    r = st.find_redex()
    if r is None:
        return None
    path = st.path(r.rules)
    st.apply(r)
    return st.configuration(), path


def step_expr(sigma, kappa, catalog, e, scope: S.Scope, **kw):
    """Successor expression, or None for a value."""
    out = step(Configuration(sigma, kappa, catalog, e, scope), **kw)
    return None if out is None else out[0].term


def step_stmt(sigma, kappa, catalog, s, scope: S.Scope, **kw):
    """Successor (σ, κ, catalog, statement), or None for ``skip``."""
    out = step(Configuration(sigma, kappa, catalog, s, scope), judgement=STMT, **kw)
    if out is None:
        return None
    c = out[0]
    return c.sigma, c.kappa, c.catalog, c.term


def step_manifest(sigma, kappa, catalog, m, node: str, **kw):
    """Successor (σ, κ, catalog, manifest), or None for ``skip``."""
    out = step(Configuration(sigma, kappa, catalog, m, node), **kw)
    if out is None:
        return None
    c = out[0]
    return c.sigma, c.kappa, c.catalog, c.term
