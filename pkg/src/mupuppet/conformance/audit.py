"""Rule-applicability auditor.

An independent, deliberately naive reading of the rule set: every rule is a
function that checks its own premises against a configuration and returns
each derivation it can build (premises that are themselves steps are
derived recursively). The stepper picks one derivation; the auditor lists
them all, so "at most one" is a genuine check rather than a tautology.

Only the auxiliary functions (lookup, merge, update, clear) and the value
predicate are shared with the stepper; scope ancestry is re-derived here as
a relation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

from .. import syntax as S
from ..environments import (
    ClassDefinition,
    DeclaredClass,
    ResourceDefinition,
    env_clear,
    env_update,
    merge_params,
)
from ..errors import CompileError
from ..evaluator import EXPR, MANIFEST, STMT, Configuration, judgement_of
from ..values import ResourceValue, catalog_append, catalog_lookup, hash_lookup, is_value


@dataclass(frozen=True)
class Derivation:
    path: Tuple[str, ...]
    sigma: object
    kappa: object
    catalog: object
    term: object


class _Ctx:
    __slots__ = ("sigma", "kappa", "catalog", "builtin")

    def __init__(self, sigma, kappa, catalog, builtin):
        self.sigma = sigma
        self.kappa = kappa
        self.catalog = catalog
        self.builtin = builtin

    def same(self, rule, term) -> Derivation:
        return Derivation((rule,), self.sigma, self.kappa, self.catalog, term)


def _wrap(rule, derivs, rebuild) -> List[Derivation]:
    return [
        Derivation((rule,) + d.path, d.sigma, d.kappa, d.catalog, rebuild(d.term))
        for d in derivs
    ]


def _prefix(rules: Tuple[str, ...], derivs, rebuild) -> List[Derivation]:
    return [Derivation(rules + d.path, d.sigma, d.kappa, d.catalog, rebuild(d.term)) for d in derivs]


# -- scope relations ----------------------------------------------------------


def bases(kappa, scope, _depth=0) -> List[S.Scope]:
    """All β with β baseof scope."""
    if _depth > 10_000:
        return []
    out = []
    if scope == S.TOP:
        out.append(S.TOP)  # BTop
    if scope == S.NODE:
        out.append(S.NODE)  # BNode
    if isinstance(scope, S.DefScope):
        out.extend(bases(kappa, scope.inner, _depth + 1))  # BDefRes
    if isinstance(scope, S.ClassScope):
        d = kappa.get(scope.name)
        if isinstance(d, DeclaredClass):  # BClass
            out.extend(bases(kappa, d.scope, _depth + 1))
    return out


def parents(kappa, scope) -> List[S.Scope]:
    """All β with β parentof scope."""
    out = []
    if scope == S.NODE:
        out.append(S.TOP)  # PNode
    if isinstance(scope, S.DefScope):
        out.extend(bases(kappa, scope))  # PDefRes, as in the prose
    if isinstance(scope, S.ClassScope):
        d = kappa.get(scope.name)
        if isinstance(d, DeclaredClass):  # PClass
            out.append(d.scope)
    return out


def _bound(sigma, scope, name) -> bool:
    frame = sigma.get(scope)
    return frame is not None and name in frame


def _int(v) -> bool:
    return type(v) is S.IntLit


def _bool(v, b=None) -> bool:
    return type(v) is S.BoolLit and (b is None or v.value is b)


# -- expressions ---------------------------------------------------------------


def expr(c: _Ctx, e, a) -> List[Derivation]:
    out: List[Derivation] = []
    for rule in _EXPR_RULES:
        out.extend(rule(c, e, a))
    return out


def r_lvar(c, e, a):
    if type(e) is S.Var and _bound(c.sigma, a, e.name):
        return [c.same("LVar", c.sigma[a][e.name])]
    return []


def r_pvar(c, e, a):
    if type(e) is not S.Var or _bound(c.sigma, a, e.name):
        return []
    out = []
    for beta in parents(c.kappa, a):
        for d in expr(c, e, beta):
            if is_value(d.term):
                out.append(Derivation(("PVar",) + d.path, d.sigma, d.kappa, d.catalog, d.term))
    return out


def r_tvar(c, e, a):
    if type(e) is S.TopVar and _bound(c.sigma, S.TOP, e.name):
        return [c.same("TVar", c.sigma[S.TOP][e.name])]
    return []


def r_qvar(c, e, a):
    if type(e) is S.QualVar:
        scope = S.ClassScope(e.cls)
        if _bound(c.sigma, scope, e.name):
            return [c.same("QVar", c.sigma[scope][e.name])]
    return []


def _binop_rules(ops, left_name, right_name, right_guard):
    def left(c, e, a):
        if type(e) is S.BinOp and e.op in ops:
            return _wrap(left_name, expr(c, e.left, a), lambda x: S.BinOp(e.op, x, e.right))
        return []

    def right(c, e, a):
        if type(e) is S.BinOp and e.op in ops and right_guard(e.left):
            return _wrap(right_name, expr(c, e.right, a), lambda x: S.BinOp(e.op, e.left, x))
        return []

    return left, right


r_arith_left, r_arith_right = _binop_rules(S.ARITH_OPS, "ArithLeft", "ArithRight", _int)
r_comp_left, r_comp_right = _binop_rules(S.COMPARISON_OPS, "CompLeft", "CompRight", is_value)
r_and_left, r_and_right2 = _binop_rules(("and",), "AndLeft", "AndRightII", lambda v: _bool(v, True))
r_or_left, r_or_right2 = _binop_rules(("or",), "OrLeft", "OrRightII", lambda v: _bool(v, False))


def r_arith_value(c, e, a):
    if type(e) is S.BinOp and e.op in S.ARITH_OPS and _int(e.left) and _int(e.right):
        x, y = e.left.value, e.right.value
        if e.op == "+":
            n = x + y
        elif e.op == "-":
            n = x - y
        elif e.op == "*":
            n = x * y
        elif y == 0:
            return []
        elif e.op == "/":
            n = x // y
        else:
            n = x - y * (x // y)
        return [c.same("ArithValue", S.IntLit(n))]
    return []


def _holds(op, l, r) -> Optional[bool]:
    if op == "==":
        return l == r
    if op == "!=":
        return not (l == r)
    if not (_int(l) and _int(r)):
        return None
    x, y = l.value, r.value
    return {">": x > y, "<": x < y, ">=": not x < y, "<=": not x > y}[op]


def r_comp_value1(c, e, a):
    if type(e) is S.BinOp and e.op in S.COMPARISON_OPS and is_value(e.left) and is_value(e.right):
        if _holds(e.op, e.left, e.right) is True:
            return [c.same("CompValueI", S.BoolLit(True))]
    return []


def r_comp_value2(c, e, a):
    if type(e) is S.BinOp and e.op in S.COMPARISON_OPS and is_value(e.left) and is_value(e.right):
        if _holds(e.op, e.left, e.right) is False:
            return [c.same("CompValueII", S.BoolLit(False))]
    return []


def _bool_const(op, left, right, rule, result):
    def r(c, e, a):
        if type(e) is S.BinOp and e.op == op and _bool(e.left, left):
            if right is None or _bool(e.right, right):
                return [c.same(rule, S.BoolLit(result))]
        return []

    return r


r_and_right1 = _bool_const("and", False, None, "AndRightI", False)
r_and_value = _bool_const("and", True, True, "AndValue", True)
r_and_value2 = _bool_const("and", True, False, "AndValueII", False)
r_or_right1 = _bool_const("or", True, None, "OrRightI", True)
r_or_value = _bool_const("or", False, False, "OrValue", False)
r_or_value2 = _bool_const("or", False, True, "OrValueII", True)


def r_not_step(c, e, a):
    if type(e) is S.Not:
        return _wrap("NotStep", expr(c, e.operand, a), S.Not)
    return []


def r_not_values(c, e, a):
    if type(e) is S.Not and _bool(e.operand):
        if e.operand.value:
            return [c.same("NotValueI", S.BoolLit(False))]
        return [c.same("NotValueII", S.BoolLit(True))]
    return []


def _list_rules(c, items, a, head_value, head_step):
    """Derivations of the element-list judgement for arrays and hashes."""
    if not items:
        return []
    first, rest = items[0], items[1:]
    out = []
    # element-wise step on the head
    out.extend(_prefix((head_step,), expr(c, first[1], a), lambda x: ((first[0], x),) + rest))
    if is_value(first[1]):
        out.extend(_prefix((head_value,), _list_rules(c, rest, a, head_value, head_step),
                           lambda tail: (first,) + tail))
    return out


def r_arr(c, e, a):
    if type(e) is not S.ArrayExpr:
        return []
    items = tuple((None, x) for x in e.items)
    derivs = _list_rules(c, items, a, "ArrEleI", "ArrEleII")
    return _wrap("ArrExp", derivs, lambda t: S.ArrayExpr(tuple(x for _, x in t)))


def r_hash(c, e, a):
    if type(e) is not S.HashExpr:
        return []
    derivs = _list_rules(c, e.entries, a, "HEleI", "HEleII")
    return _wrap("HaExp", derivs, S.HashExpr)


def r_sel_control(c, e, a):
    if type(e) is S.Selector:
        return _wrap("SControl", expr(c, e.subject, a), lambda x: S.Selector(x, e.arms))
    return []


def _sel_head(e):
    if type(e) is S.Selector and is_value(e.subject) and e.arms:
        return e.arms[0]
    return None


def r_sel_case(c, e, a):
    head = _sel_head(e)
    if head is None or head[0] is S.DEFAULT:
        return []
    return _wrap("SCase", expr(c, head[0], a),
                 lambda x: S.Selector(e.subject, ((x, head[1]),) + e.arms[1:]))


def r_sel_choose(c, e, a):
    head = _sel_head(e)
    if head is None or head[0] is S.DEFAULT or not is_value(head[0]):
        return []
    if e.subject == head[0]:
        return [c.same("SChooseI", head[1])]
    return [c.same("SChooseII", S.Selector(e.subject, e.arms[1:]))]


def r_sel_default(c, e, a):
    head = _sel_head(e)
    if head is not None and head[0] is S.DEFAULT:
        return [c.same("SDefault", head[1])]
    return []


def r_deref_exp(c, e, a):
    if type(e) is S.Deref:
        return _wrap("DeRefExp", expr(c, e.target, a), lambda x: S.Deref(x, e.index))
    return []


def r_deref_index(c, e, a):
    if type(e) is S.Deref and is_value(e.target):
        return _wrap("DeRefIndex", expr(c, e.index, a), lambda x: S.Deref(e.target, x))
    return []


def r_deref_array(c, e, a):
    if type(e) is S.Deref and type(e.target) is S.ArrayExpr and is_value(e.target) and _int(e.index):
        n = e.index.value
        if 0 <= n < len(e.target.items):
            return [c.same("DeRefArray", e.target.items[n])]
    return []


def r_deref_hash(c, e, a):
    if type(e) is S.Deref and type(e.target) is S.HashExpr and is_value(e.target):
        if type(e.index) in (S.IntLit, S.StrLit):
            for k, v in e.target.entries:  # first matching key
                if k == e.index.value and type(k) is type(e.index.value):
                    return [c.same("DeRefHash", v)]
    return []


def r_ref_res(c, e, a):
    if type(e) is S.ResourceRef:
        return _wrap("RefRes", expr(c, e.title, a), lambda x: S.ResourceRef(e.type, x))
    return []


def r_deref_res(c, e, a):
    if (type(e) is S.Deref and type(e.target) is S.ResourceRef
            and type(e.target.title) is S.StrLit and type(e.index) is S.StrLit):
        v = catalog_lookup(c.catalog, e.target.type, e.target.title.value, e.index.value)
        if v is not None:
            return [c.same("DeRefRes", v)]
    return []


_EXPR_RULES = (
    r_lvar, r_pvar, r_tvar, r_qvar,
    r_arith_left, r_arith_right, r_arith_value,
    r_comp_left, r_comp_right, r_comp_value1, r_comp_value2,
    r_and_left, r_and_right1, r_and_right2, r_and_value, r_and_value2,
    r_or_left, r_or_right1, r_or_right2, r_or_value, r_or_value2,
    r_not_step, r_not_values,
    r_arr, r_hash,
    r_sel_control, r_sel_case, r_sel_choose, r_sel_default,
    r_deref_exp, r_deref_index, r_deref_array, r_deref_hash, r_ref_res, r_deref_res,
)


# -- resource bodies --------------------------------------------------------------


def hash_steps(c, attrs, a) -> List[Derivation]:
    """σ, κ, H → H′ (ResStepII / ResStepIII); terms are attribute tuples."""
    if not attrs:
        return []
    (name, e), rest = attrs[0], attrs[1:]
    out = _prefix(("ResStepII",), expr(c, e, a), lambda x: ((name, x),) + rest)
    if is_value(e):
        out.extend(_prefix(("ResStepIII",), hash_steps(c, rest, a), lambda t: ((name, e),) + t))
    return out


def body_steps(c, title, attrs, a) -> List[Derivation]:
    """σ, κ, e:H → e′:H′ (ResTitle / ResStepI); terms are (title, attrs)."""
    out = _prefix(("ResTitle",), expr(c, title, a), lambda x: (x, attrs))
    if is_value(title):
        out.extend(_prefix(("ResStepI",), hash_steps(c, attrs, a), lambda h: (title, h)))
    return out


# -- statements -------------------------------------------------------------------


def stmt(c: _Ctx, s, a) -> List[Derivation]:
    out: List[Derivation] = []
    for rule in _STMT_RULES:
        try:
            out.extend(rule(c, s, a))
        except CompileError:
            # an auxiliary function is undefined here (merge, update, append),
            # so the rule's premises do not hold
            pass
    return out


def r_expr_step(c, s, a):
    if isinstance(s, S.EXPRESSION_TYPES):
        return _wrap("ExprStep", expr(c, s, a), lambda x: x)
    return []


def r_expr(c, s, a):
    if isinstance(s, S.EXPRESSION_TYPES) and is_value(s):
        return [c.same("Expr", S.SKIP)]
    return []


def r_seq_step(c, s, a):
    if type(s) is S.Seq:
        return _wrap("SeqStep", stmt(c, s.first, a), lambda x: S.Seq(x, s.rest))
    return []


def r_seq_skip(c, s, a):
    if type(s) is S.Seq and type(s.first) is S.Skip:
        return [c.same("SeqSkip", s.rest)]
    return []


def r_assign_step(c, s, a):
    if type(s) is S.Assign:
        return _wrap("AssignStep", expr(c, s.value, a), lambda x: S.Assign(s.name, x))
    return []


def r_assign(c, s, a):
    if type(s) is S.Assign and is_value(s.value) and not _bound(c.sigma, a, s.name):
        sigma = env_update(c.sigma, a, s.name, s.value)
        return [Derivation(("Assign",), sigma, c.kappa, c.catalog, S.SKIP)]
    return []


def r_if(c, s, a):
    if type(s) is not S.IfElse:
        return []
    out = _wrap("IfStep", expr(c, s.cond, a), lambda x: S.IfElse(x, s.then, s.orelse))
    if _bool(s.cond, True):
        out.append(c.same("IfT", s.then))
    if _bool(s.cond, False):
        out.append(c.same("IfF", s.orelse))
    return out


def r_unless(c, s, a):
    if type(s) is not S.Unless:
        return []
    out = _wrap("UnlessStep", expr(c, s.cond, a), lambda x: S.Unless(x, s.body))
    if _bool(s.cond, True):
        out.append(c.same("UnlessT", S.SKIP))
    if _bool(s.cond, False):
        out.append(c.same("UnlessF", s.body))
    return out


def r_case(c, s, a):
    if type(s) is not S.CaseStmt:
        return []
    out = _wrap("CaseStep1", expr(c, s.subject, a), lambda x: S.CaseStmt(x, s.arms))
    if not is_value(s.subject):
        return out
    if not s.arms:
        out.append(c.same("CaseDone", S.SKIP))
        return out
    (label, body), rest = s.arms[0], s.arms[1:]
    if label is S.DEFAULT:
        out.append(c.same("CaseMatch", body))
        return out
    out.extend(_wrap("CaseStep2", expr(c, label, a),
                     lambda x: S.CaseStmt(s.subject, ((x, body),) + rest)))
    if is_value(label):
        if s.subject == label:
            out.append(c.same("CaseMatch", body))
        else:
            out.append(c.same("CaseNoMatch", S.CaseStmt(s.subject, rest)))
    return out


def r_res_step(c, s, a):
    if type(s) is S.ResourceDecl and s.type in c.builtin:
        return _wrap("ResStep", body_steps(c, s.title, s.attrs, a),
                     lambda th: S.ResourceDecl(s.type, th[0], th[1]))
    return []


def r_res_decl(c, s, a):
    if (type(s) is S.ResourceDecl and s.type in c.builtin and type(s.title) is S.StrLit
            and all(is_value(v) for _, v in s.attrs)):
        catalog = catalog_append(c.catalog, ResourceValue(s.type, s.title.value, s.attrs))
        return [Derivation(("ResDecl",), c.sigma, c.kappa, catalog, S.SKIP)]
    return []


def r_def_step(c, s, a):
    if type(s) is S.ResourceDecl and s.type not in c.builtin:
        return _wrap("DefStep", body_steps(c, s.title, s.attrs, a),
                     lambda th: S.ResourceDecl(s.type, th[0], th[1]))
    return []


def r_def(c, s, a):
    if (type(s) is S.ResourceDecl and s.type not in c.builtin and type(s.title) is S.StrLit
            and all(is_value(v) for _, v in s.attrs)):
        d = c.kappa.get(s.type)
        if type(d) is ResourceDefinition:
            inits = merge_params(d.params, s.attrs)
            body = S.seq([S.Assign("title", s.title), *inits, S.SKIP, d.body])
            return [c.same("Def", S.ScopeStmt(S.DefScope(a), body))]
    return []


def _class_scope_body(name, params, entries, body):
    return S.ScopeStmt(S.ClassScope(name), S.seq([*merge_params(params, entries), S.SKIP, body]))


def _declare(c, rule, name, d, entries, beta):
    kappa = c.kappa.set(name, DeclaredClass(beta))
    return Derivation((rule,), c.sigma, kappa, c.catalog,
                      _class_scope_body(name, d.params, entries, d.body))


def r_include(c, s, a):
    if type(s) is not S.Include:
        return []
    d = c.kappa.get(s.name)
    out = []
    if type(d) is DeclaredClass:
        out.append(c.same("IncD", S.SKIP))
    if type(d) is ClassDefinition and d.parent is None:
        for beta in bases(c.kappa, a):
            out.append(_declare(c, "IncU", s.name, d, (), beta))
    if type(d) is ClassDefinition and d.parent is not None:
        pd = c.kappa.get(d.parent)
        if type(pd) is ClassDefinition:
            out.append(c.same("IncPU", S.Seq(S.Include(d.parent), s)))
        if type(pd) is DeclaredClass:
            out.append(_declare(c, "IncPD", s.name, d, (), S.ClassScope(d.parent)))
    return out


def r_class_decl(c, s, a):
    if type(s) is not S.ClassDecl:
        return []
    d = c.kappa.get(s.name)
    if type(d) is not ClassDefinition:
        return []
    out = _wrap("CDecStep", hash_steps(c, s.attrs, a), lambda h: S.ClassDecl(s.name, h))
    if not all(is_value(v) for _, v in s.attrs):
        return out
    if d.parent is None:
        for beta in bases(c.kappa, a):
            out.append(_declare(c, "CDecU", s.name, d, s.attrs, beta))
    else:
        pd = c.kappa.get(d.parent)
        if type(pd) is ClassDefinition:
            out.append(c.same("CDecPU", S.Seq(S.Include(d.parent), s)))
        if type(pd) is DeclaredClass:
            out.append(_declare(c, "CDecPD", s.name, d, s.attrs, S.ClassScope(d.parent)))
    return out


def r_fail_step(c, s, a):
    if type(s) is S.Fail:
        return _wrap("FailStep", expr(c, s.message, a), S.Fail)
    return []


_PERSISTENT = (S.TopScope, S.NodeScope, S.ClassScope)


def r_scope(c, s, a):
    if type(s) is not S.ScopeStmt:
        return []
    alpha = s.scope
    out = []
    if isinstance(alpha, _PERSISTENT):
        out.extend(_wrap("ScopeStep", stmt(c, s.body, alpha), lambda x: S.ScopeStmt(alpha, x)))
        if type(s.body) is S.Skip:
            out.append(c.same("ScopeDone", S.SKIP))
    if isinstance(alpha, S.DefScope) and alpha.inner == a:
        out.extend(_wrap("DefScopeStep", stmt(c, s.body, alpha), lambda x: S.ScopeStmt(alpha, x)))
        if type(s.body) is S.Skip:
            out.append(Derivation(("DefScopeDone",), env_clear(c.sigma, alpha), c.kappa, c.catalog, S.SKIP))
    return out


_STMT_RULES = (
    r_expr_step, r_expr, r_seq_step, r_seq_skip, r_assign_step, r_assign,
    r_if, r_unless, r_case, r_res_step, r_res_decl, r_def_step, r_def,
    r_include, r_class_decl, r_fail_step, r_scope,
)


# -- manifests --------------------------------------------------------------------


def manifest(c: _Ctx, m, node: str) -> List[Derivation]:
    out: List[Derivation] = []
    if isinstance(m, S.STATEMENT_TYPES):
        out.extend(_wrap("TopScope", stmt(c, m, S.TOP), lambda x: x))
    if type(m) is S.MSeq:
        out.extend(_wrap("MSeqStep", manifest(c, m.first, node), lambda x: S.MSeq(x, m.rest)))
        if type(m.first) is S.Skip:
            out.append(c.same("MSeqSkip", m.rest))
    if type(m) is S.NodeDef:
        spec = m.spec
        hit = (type(spec) is S.NodeDefault
               or (type(spec) is S.NodeName and spec.name == node)
               or (type(spec) is S.NodeList and node in spec.names))
        out.append(c.same("NodeMatch", S.ScopeStmt(S.NODE, m.body)) if hit
                   else c.same("NodeNoMatch", S.SKIP))
    if type(m) is S.DefineDef and m.name not in c.kappa:
        out.append(Derivation(("RDef",), c.sigma, c.kappa.set(m.name, ResourceDefinition(m.params, m.body)),
                              c.catalog, S.SKIP))
    if type(m) is S.ClassDef and m.name not in c.kappa:
        rule = "CDef" + ("P" if m.params is not None else "") + ("I" if m.parent is not None else "")
        d = ClassDefinition(m.parent, m.params if m.params is not None else (), m.body)
        out.append(Derivation((rule,), c.sigma, c.kappa.set(m.name, d), c.catalog, S.SKIP))
    return out


# -- entry points ------------------------------------------------------------------


def derivations(config: Configuration, judgement: Optional[str] = None,
                builtin_types: Iterable[str] = S.BUILTIN_TYPES) -> List[Derivation]:
    """Every derivation of one step from ``config``."""
    c = _Ctx(config.sigma, config.kappa, config.catalog, frozenset(builtin_types))
    judgement = judgement or judgement_of(config.term, config.context)
    if judgement == MANIFEST:
        return manifest(c, config.term, config.context)
    if judgement == EXPR:
        return expr(c, config.term, config.context)
    return stmt(c, config.term, config.context)


def audit_step(config: Configuration, judgement: Optional[str] = None,
               builtin_types: Iterable[str] = S.BUILTIN_TYPES) -> List[str]:
    """Names of the rules that apply at the root of ``config``."""
    return [d.path[0] for d in derivations(config, judgement, builtin_types)]
