"""Seeded random manifests.

Safe mode builds programs meant to compile: variables are assigned before
they are read and names are never reused, so no scope is assigned twice.
Classes and defined types are defined before the statements that use them,
inheritance points only at earlier classes, and every resource title is
unique. Unsafe mode takes a safe program and splices one fault template
into its top-level statements, so that the fault is the first thing to go
wrong.

All programs are built in the shape the parser produces, so
``parse(pretty(m)) == m`` holds for every one of them.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
import dataclasses
from typing import Callable, Dict, Iterator, List, Optional, Tuple

from .. import syntax as S
from ..errors import ErrorKind

GEN_NODE = "gen.example.com"
OTHER_NODES = ("web.example.com", "db.example.com")

# Faults that unsafe mode can inject. StepLimitExceeded reuses the cycle
# template, compiled with cycle detection off.
FAULT_KINDS = (
    ErrorKind.UndefinedVariable,
    ErrorKind.DuplicateVariable,
    ErrorKind.DuplicateResource,
    ErrorKind.UndefinedDefinition,
    ErrorKind.DuplicateDefinition,
    ErrorKind.ClassAlreadyDeclared,
    ErrorKind.MissingParameter,
    ErrorKind.UnknownParameter,
    ErrorKind.TypeMismatch,
    ErrorKind.DivisionByZero,
    ErrorKind.SelectorNoMatch,
    ErrorKind.BadDereference,
    ErrorKind.InheritanceCycle,
    ErrorKind.ExplicitFailure,
)

DEFAULT_WEIGHTS = {
    "assign": 4,
    "resource": 4,
    "if": 2,
    "unless": 1,
    "case": 1,
    "include": 2,
    "define": 2,
    "expr": 1,
}


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    max_depth: int = 3
    max_classes: int = 4
    max_defines: int = 2
    max_inherit_depth: int = 2
    max_stmts: int = 6
    mode: str = "safe"  # or "unsafe"
    fault_rate: float = 1.0  # unsafe mode: chance of injecting a fault
    weights: Dict[str, int] = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))

    def __post_init__(self):
        if min(self.max_depth, self.max_stmts) < 1 or min(self.max_classes, self.max_defines) < 0:
            raise ValueError("generator bounds must be positive")
        if self.mode not in ("safe", "unsafe"):
            raise ValueError("mode must be 'safe' or 'unsafe'")


# Value shapes tracked for typed generation.
INT, STR, BOOL, ANY = "int", "str", "bool", "any"


@dataclass(frozen=True)
class Shape:
    kind: str  # int str bool any array hash
    size: int = 0  # array length
    keys: Tuple = ()  # hash keys


@dataclass(frozen=True)
class VarRef:
    expr: S.Expression  # how to read it from the current scope
    shape: Shape


@dataclass
class ClassInfo:
    name: str
    parent: Optional[str]
    params: S.Params
    exports: List[Tuple[str, Shape]]  # unconditional top-level assignments
    resource_like: bool  # declared once with class {...}, never included
    depth: int


@dataclass
class DefineInfo:
    name: str
    params: S.Params
    required: List[str]


class _Gen:
    def __init__(self, cfg: GenConfig):
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.counter = 0
        self.classes: List[ClassInfo] = []
        self.defines: List[DefineInfo] = []
        self.catalog_known: List[Tuple[str, str, str, Shape]] = []  # (type, title, attr, shape)

    # -- names ------------------------------------------------------------

    def fresh(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    def title(self) -> str:
        return self.fresh("r")

    # -- expressions --------------------------------------------------------

    def shape(self) -> Shape:
        k = self.rng.choice([INT, INT, STR, STR, BOOL, "array", "hash"])
        if k == "array":
            return Shape("array", self.rng.randint(1, 3))
        if k == "hash":
            n = self.rng.randint(1, 3)
            keys = tuple(self.rng.sample(["a", "b", "c", 1, 2], n))
            return Shape("hash", keys=keys)
        return Shape(k)

    def literal(self, shape: Shape) -> S.Expression:
        r = self.rng
        if shape.kind == INT:
            return S.IntLit(r.randint(-20, 99))
        if shape.kind == STR:
            return S.StrLit(r.choice(["a", "b", "alice", "present", "/etc/x", "it's", "a b"]))
        if shape.kind == BOOL:
            return S.BoolLit(r.random() < 0.5)
        return self.literal(Shape(r.choice([INT, STR, BOOL])))

    def vars_of(self, env: List[VarRef], kind: str) -> List[VarRef]:
        return [v for v in env if v.shape.kind == kind or (kind == ANY)]

    def expr(self, shape: Shape, env: List[VarRef], depth: int) -> S.Expression:
        r = self.rng
        leaf = depth <= 0 or r.random() < 0.35
        candidates = [v for v in env if v.shape == shape or (shape.kind == ANY and v.shape.kind != "any")]
        if shape.kind == ANY:
            candidates = list(env)
        if candidates and r.random() < 0.5:
            return r.choice(candidates).expr
        if shape.kind == "array":
            return S.ArrayExpr(tuple(self.expr(Shape(ANY), env, depth - 1) for _ in range(shape.size)))
        if shape.kind == "hash":
            return S.HashExpr(tuple((k, self.expr(Shape(ANY), env, depth - 1)) for k in shape.keys))
        if leaf:
            if shape.kind == ANY and r.random() < 0.15:
                return self.expr(self.shape(), env, 0)
            return self.literal(shape)
        d = depth - 1
        if shape.kind == INT:
            pick = r.randrange(5)
            if pick == 0:
                op = r.choice(["+", "-", "*"])
                return S.BinOp(op, self.expr(shape, env, d), self.expr(shape, env, d))
            if pick == 1:
                # divisor x * x + 1 is never zero
                x = self.expr(shape, env, d)
                div = S.BinOp("+", S.BinOp("*", x, x), S.IntLit(1))
                return S.BinOp(r.choice(["/", "%"]), self.expr(shape, env, d), div)
            if pick == 2:
                return self.selector(shape, env, d)
            if pick == 3:
                return self.deref(env, d, shape)
            return self.literal(shape)
        if shape.kind == BOOL:
            pick = r.randrange(5)
            if pick == 0:
                return S.BinOp(r.choice(S.ORDER_OPS), self.expr(Shape(INT), env, d), self.expr(Shape(INT), env, d))
            if pick == 1:
                s = self.shape() if r.random() < 0.3 else Shape(r.choice([INT, STR]))
                return S.BinOp(r.choice(S.EQUALITY_OPS), self.expr(s, env, d), self.expr(s, env, d))
            if pick == 2:
                return S.BinOp(r.choice(S.BOOL_OPS), self.expr(shape, env, d), self.expr(shape, env, d))
            if pick == 3:
                return S.Not(self.expr(shape, env, d))
            return self.selector(shape, env, d)
        if shape.kind == STR:
            if r.random() < 0.5:
                return self.selector(shape, env, d)
            return self.literal(shape)
        # ANY
        pick = r.randrange(3)
        if pick == 0:
            return self.deref(env, d)
        if pick == 1 and self.catalog_known:
            t, title, attr, _ = r.choice(self.catalog_known)
            return S.Deref(S.ResourceRef(t, S.StrLit(title)), S.StrLit(attr))
        return self.expr(self.shape(), env, d)

    def selector(self, shape: Shape, env, depth) -> S.Selector:
        r = self.rng
        subj_shape = Shape(r.choice([INT, STR]))
        subject = self.expr(subj_shape, env, depth)
        arms = []
        for _ in range(r.randint(0, 2)):
            arms.append((self.literal(subj_shape), self.expr(shape, env, depth)))
        if arms and r.random() < 0.5:
            # arm labels may be computed too
            label = self.expr(subj_shape, env, 0)
            arms.insert(0, (label, self.expr(shape, env, depth)))
        arms.append((S.DEFAULT, self.expr(shape, env, depth)))
        return S.Selector(subject, tuple(arms))

    def deref(self, env, depth, shape: Shape = Shape(ANY)) -> Optional[S.Expression]:
        """An index into an array or hash. Containers from ``env`` hold
        values of unknown shape, so typed derefs index fresh literals."""
        r = self.rng
        typed = shape.kind != ANY
        if r.random() < 0.5:
            arrays = [v for v in env if v.shape.kind == "array"]
            if arrays and not typed and r.random() < 0.5:
                v = r.choice(arrays)
                return S.Deref(v.expr, S.IntLit(r.randrange(v.shape.size)))
            size = r.randint(1, 3)
            at = r.randrange(size)
            items = tuple(self.expr(shape if i == at else Shape(ANY), env, depth) for i in range(size))
            return S.Deref(S.ArrayExpr(items), S.IntLit(at))
        hashes = [v for v in env if v.shape.kind == "hash"]
        if hashes and not typed and r.random() < 0.5:
            v = r.choice(hashes)
            target, k = v.expr, r.choice(v.shape.keys)
        else:
            keys = r.sample(["a", "b", "c", 1, 2], r.randint(1, 3))
            k = r.choice(keys)
            target = S.HashExpr(tuple((key, self.expr(shape if key == k else Shape(ANY), env, depth))
                                      for key in keys))
        return S.Deref(target, S.IntLit(k) if isinstance(k, int) else S.StrLit(k))

    # -- statements ---------------------------------------------------------

    def attrs(self, env, depth, n=None) -> S.Attrs:
        names = ["ensure", "owner", "mode", "path", "content", "backup", "source", "require"]
        k = self.rng.randint(0, 3) if n is None else n
        return tuple((name, self.expr(Shape(ANY), env, depth)) for name in self.rng.sample(names, k))

    def block(self, env: List[VarRef], depth: int, where: str, top_level: bool = False) -> Tuple[S.Statement, List]:
        """A statement sequence; returns it with the variables it assigns unconditionally."""
        env = list(env)
        assigned = []
        stmts = []
        for _ in range(self.rng.randint(1 if top_level else 0, self.cfg.max_stmts)):
            s, new = self.statement(env, depth, where, top_level)
            stmts.append(s)
            env.extend(new)
            assigned.extend(new)
        return S.seq(stmts), assigned

    def statement(self, env, depth, where, top_level) -> Tuple[S.Statement, List[VarRef]]:
        r = self.rng
        w = dict(self.cfg.weights)
        if depth <= 0:
            for k in ("if", "unless", "case"):
                w[k] = 0
        includable = [c for c in self.classes if not c.resource_like]
        if not includable:
            w["include"] = 0
        if not self.defines or where == "define":
            w["define"] = 0
        if where == "define":
            # a define body runs once per instance; fixed titles would clash
            w["resource"] = 0
        kind = r.choices(list(w), weights=list(w.values()))[0]
        d = depth - 1
        if kind == "assign":
            name = self.fresh("v")
            shape = self.shape()
            value = self.expr(shape, env, self.cfg.max_depth)
            return S.Assign(name, value), [VarRef(S.Var(name), shape)]
        if kind == "resource":
            t = r.choice(sorted(S.BUILTIN_TYPES))
            title = self.title()
            attrs = self.attrs(env, self.cfg.max_depth)
            if top_level and where == "top":
                for name, value in attrs:
                    if _literal_shape(value) is not None:
                        self.catalog_known.append((t, title, name, _literal_shape(value)))
            return S.ResourceDecl(t, S.StrLit(title), attrs), []
        if kind == "if":
            cond = self.expr(Shape(BOOL), env, 2)
            then, _ = self.block(env, d, where)
            orelse = self.block(env, d, where)[0] if r.random() < 0.6 else S.SKIP
            return S.IfElse(cond, then, orelse), []
        if kind == "unless":
            cond = self.expr(Shape(BOOL), env, 2)
            return S.Unless(cond, self.block(env, d, where)[0]), []
        if kind == "case":
            shape = Shape(r.choice([INT, STR]))
            subject = self.expr(shape, env, 2)
            arms = []
            for _ in range(r.randint(1, 3)):
                arms.append((self.literal(shape), self.block(env, d, where)[0]))
            if r.random() < 0.7:
                arms.append((S.DEFAULT, self.block(env, d, where)[0]))
            return S.CaseStmt(subject, tuple(arms)), []
        if kind == "include":
            return S.Include(r.choice(includable).name), []
        if kind == "define":
            info = r.choice(self.defines)
            chosen = [p.name for p in info.params if p.name in info.required or r.random() < 0.5]
            attrs = tuple((n, self.expr(Shape(ANY), env, 2)) for n in chosen)
            return S.ResourceDecl(info.name, S.StrLit(self.title()), attrs), []
        # expression statement
        return self.expr(Shape(r.choice([INT, BOOL])), env, 2), []

    # -- definitions -----------------------------------------------------------

    def global_refs(self, globals_: List[VarRef]) -> List[VarRef]:
        """Top-scope variables read as $::x (works from any scope)."""
        return [VarRef(S.TopVar(v.expr.name), v.shape) for v in globals_]

    def params(self, env, allow_required: bool) -> Tuple[S.Params, List[str], List[VarRef]]:
        params, required, refs = [], [], []
        for _ in range(self.rng.randint(0, 3)):
            name = self.fresh("p")
            shape = Shape(self.rng.choice([INT, STR, BOOL]))
            if allow_required and self.rng.random() < 0.4:
                params.append(S.Param(name))
                required.append(name)
                refs.append(VarRef(S.Var(name), Shape(ANY)))
            else:
                params.append(S.Param(name, self.expr(shape, env, 1)))
                refs.append(VarRef(S.Var(name), shape if required == [] else Shape(ANY)))
        return tuple(params), required, refs

    def define_def(self, globals_) -> S.DefineDef:
        name = self.fresh("d")
        env = self.global_refs(globals_) + list(globals_)
        params, required, refs = self.params(self.global_refs(globals_), True)
        # supplied arguments may have any shape
        refs = [VarRef(v.expr, Shape(ANY)) for v in refs]
        env = env + refs + [VarRef(S.Var("title"), Shape(STR))]
        body_stmts = []
        for _ in range(self.rng.randint(0, 2)):
            v = self.fresh("v")
            shape = self.shape()
            body_stmts.append(S.Assign(v, self.expr(shape, env, 2)))
            env.append(VarRef(S.Var(v), shape))
        t = self.rng.choice(sorted(S.BUILTIN_TYPES))
        body_stmts.append(S.ResourceDecl(t, S.Var("title"), self.attrs(env, 2)))
        if self.rng.random() < 0.5:
            s, _ = self.block(env, 1, "define")
            body_stmts.insert(len(body_stmts) - self.rng.randint(0, 1), s)
        self.defines.append(DefineInfo(name, params, required))
        return S.DefineDef(name, params, S.seq(_flatten(body_stmts)))

    def class_def(self, globals_) -> S.ClassDef:
        r = self.rng
        name = self.fresh("c")
        if r.random() < 0.3:
            name = self.fresh("mod") + "::" + name
        parents = [c for c in self.classes if not c.resource_like and c.depth < self.cfg.max_inherit_depth]
        parent = r.choice(parents) if parents and r.random() < 0.4 else None
        resource_like = parent is None and r.random() < 0.3
        inherited = []
        p = parent
        while p is not None:
            inherited += [VarRef(S.Var(n), s) for n, s in p.exports]
            inherited += [VarRef(S.QualVar(p.name, n), s) for n, s in p.exports]
            p = next((c for c in self.classes if c.name == p.parent), None)
        scope_env = self.global_refs(globals_) + list(globals_) + inherited
        params, required, refs = (), [], []
        if r.random() < 0.5:
            params, required, refs = self.params(self.global_refs(globals_) + inherited, resource_like)
            if resource_like:
                refs = [VarRef(v.expr, Shape(ANY)) for v in refs]
        env = scope_env + refs
        body, exports = self.block(env, self.cfg.max_depth - 1, "class")
        info = ClassInfo(name, parent.name if parent else None, params,
                         [(v.expr.name, v.shape) for v in exports], resource_like,
                         (parent.depth + 1) if parent else 0)
        self.classes.append(info)
        has_params = params or r.random() < 0.3
        return S.ClassDef(name, params if has_params else None, info.parent, body)

    # -- manifest -------------------------------------------------------------

    def manifest(self) -> S.Manifest:
        r = self.rng
        items: List[S.Manifest] = []
        globals_: List[VarRef] = []
        for _ in range(r.randint(1, 3)):
            name = self.fresh("g")
            shape = self.shape()
            items.append(S.Assign(name, self.expr(shape, globals_, 2)))
            globals_.append(VarRef(S.Var(name), shape))
        for _ in range(r.randint(0, self.cfg.max_defines)):
            items.append(self.define_def(globals_))
        for _ in range(r.randint(0, self.cfg.max_classes)):
            items.append(self.class_def(globals_))
        env = list(globals_)
        for c in self.classes:
            if c.resource_like and r.random() < 0.8:
                attrs = []
                for p in c.params:
                    if p.default is None or r.random() < 0.4:
                        attrs.append((p.name, self.expr(Shape(ANY), env, 2)))
                items.append(S.ClassDecl(c.name, tuple(attrs)))
        body, _ = self.block(env, self.cfg.max_depth, "top", top_level=True)
        items.extend(S.flatten_seq(body))
        for _ in range(r.randint(0, 2)):
            spec = self.node_spec()
            node_body, _ = self.block(env, self.cfg.max_depth - 1, "node")
            items.append(S.NodeDef(spec, node_body))
        return items

    def node_spec(self) -> S.NodeSpec:
        r = self.rng
        pick = r.randrange(4)
        if pick == 0:
            return S.NodeDefault()
        if pick == 1:
            return S.NodeName(GEN_NODE)
        if pick == 2:
            return S.NodeName(r.choice(OTHER_NODES))
        names = r.sample([GEN_NODE, *OTHER_NODES], r.randint(1, 3))
        return S.NodeList(tuple(names))


def _literal_shape(e) -> Optional[Shape]:
    if isinstance(e, S.IntLit):
        return Shape(INT)
    if isinstance(e, S.StrLit):
        return Shape(STR)
    if isinstance(e, S.BoolLit):
        return Shape(BOOL)
    return None


def _flatten(stmts) -> list:
    out = []
    for s in stmts:
        out.extend(x for x in S.flatten_seq(s) if not isinstance(x, S.Skip))
    return out


# -- fault templates -----------------------------------------------------------------


def fault_items(kind: ErrorKind, tag: str) -> List[S.Manifest]:
    """Top-level items whose execution fails first with ``kind``."""
    n = lambda base: f"{base}_{tag}"  # noqa: E731
    if kind is ErrorKind.UndefinedVariable:
        return [S.Assign(n("fv"), S.BinOp("+", S.IntLit(1), S.Var(n("missing"))))]
    if kind is ErrorKind.DuplicateVariable:
        return [S.Assign(n("fv"), S.IntLit(1)), S.Assign(n("fv"), S.IntLit(2))]
    if kind is ErrorKind.DuplicateResource:
        r = S.ResourceDecl("file", S.StrLit(n("dup")), ())
        return [r, S.ResourceDecl("file", S.StrLit(n("dup")), (("owner", S.StrLit("x")),))]
    if kind is ErrorKind.UndefinedDefinition:
        return [S.Include(n("nosuch"))]
    if kind is ErrorKind.DuplicateDefinition:
        return [S.DefineDef(n("dd"), (), S.SKIP), S.DefineDef(n("dd"), (), S.SKIP)]
    if kind is ErrorKind.ClassAlreadyDeclared:
        return [S.ClassDef(n("cad"), None, None, S.SKIP), S.Include(n("cad")), S.ClassDecl(n("cad"), ())]
    if kind is ErrorKind.MissingParameter:
        return [S.ClassDef(n("mp"), (S.Param("req"),), None, S.SKIP), S.Include(n("mp"))]
    if kind is ErrorKind.UnknownParameter:
        return [S.ClassDef(n("up"), None, None, S.SKIP),
                S.ClassDecl(n("up"), (("bogus", S.IntLit(1)),))]
    if kind is ErrorKind.TypeMismatch:
        return [S.Assign(n("fv"), S.BinOp("+", S.IntLit(1), S.BoolLit(True)))]
    if kind is ErrorKind.DivisionByZero:
        return [S.Assign(n("fv"), S.BinOp("/", S.IntLit(5), S.BinOp("-", S.IntLit(2), S.IntLit(2))))]
    if kind is ErrorKind.SelectorNoMatch:
        return [S.Assign(n("fv"), S.Selector(S.IntLit(1), ((S.IntLit(2), S.IntLit(3)),)))]
    if kind is ErrorKind.BadDereference:
        return [S.Assign(n("fv"), S.Deref(S.ArrayExpr((S.IntLit(1), S.IntLit(2))), S.IntLit(5)))]
    if kind is ErrorKind.InheritanceCycle:
        a, b = n("cyca"), n("cycb")
        return [S.ClassDef(a, None, b, S.SKIP), S.ClassDef(b, None, a, S.SKIP), S.Include(a)]
    if kind is ErrorKind.ExplicitFailure:
        return [S.Fail(S.StrLit("generated failure"))]
    raise ValueError(f"no fault template for {kind}")


def gen_manifest(cfg: GenConfig) -> S.Manifest:
    """A random manifest, deterministic in ``cfg``."""
    gen = _Gen(cfg)
    items = gen.manifest()
    fault = planned_fault(cfg)
    if fault is not None:
        # after the definitions, before or among the top-level statements
        first_stmt = next(
            (i for i, m in enumerate(items)
             if isinstance(m, S.STATEMENT_TYPES) and i >= _definitions_end(items)),
            len(items),
        )
        at = gen.rng.randint(first_stmt, min(len(items), first_stmt + 1))
        items[at:at] = fault_items(fault, str(cfg.seed))
    return S.mseq(items)


def _definitions_end(items) -> int:
    last = 0
    for i, m in enumerate(items):
        if isinstance(m, (S.DefineDef, S.ClassDef)):
            last = i + 1
    return last


def planned_fault(cfg: GenConfig) -> Optional[ErrorKind]:
    """The fault unsafe mode injects for this seed, if any."""
    if cfg.mode != "unsafe":
        return None
    rng = random.Random(f"fault:{cfg.seed}")
    if rng.random() >= cfg.fault_rate:
        return None
    return rng.choice(FAULT_KINDS)


# -- shrinking -----------------------------------------------------------------


def _without(items: list, i: int) -> list:
    return items[:i] + items[i + 1:]


def reductions(m) -> Iterator:
    """Strictly smaller variants of ``m``: one item deleted, one block emptied,
    or one branch hoisted in place of its conditional."""
    if isinstance(m, S.MSeq):
        items = S.flatten_mseq(m)
        for i in range(len(items)):
            yield S.mseq(_without(items, i))
        for i, item in enumerate(items):
            for smaller in reductions(item):
                yield S.mseq(items[:i] + [smaller] + items[i + 1:])
        return
    if isinstance(m, S.Seq):
        items = S.flatten_seq(m)
        for i in range(len(items)):
            yield S.seq(_without(items, i))
        for i, item in enumerate(items):
            for smaller in reductions(item):
                yield S.seq(items[:i] + [smaller] + items[i + 1:])
        return
    if isinstance(m, S.IfElse):
        yield m.then
        yield m.orelse
    if isinstance(m, S.Unless):
        yield m.body
    if isinstance(m, S.CaseStmt):
        for i in range(len(m.arms)):
            yield dataclasses.replace(m, arms=m.arms[:i] + m.arms[i + 1:])
        for i, (c, body) in enumerate(m.arms):
            for smaller in reductions(body):
                arm = (c, smaller)
                yield dataclasses.replace(m, arms=m.arms[:i] + (arm,) + m.arms[i + 1:])
        return
    for name in ("body", "then", "orelse"):
        sub = getattr(m, name, None)
        if sub is None or isinstance(sub, S.EXPRESSION_TYPES):
            continue
        if not isinstance(sub, S.Skip):
            yield dataclasses.replace(m, **{name: S.SKIP})
        for smaller in reductions(sub):
            yield dataclasses.replace(m, **{name: smaller})


def shrink(m, still_fails: Callable[[object], bool], max_rounds: int = 10_000):
    """Greedy subtree deletion: keep the first reduction that still fails,
    until none does."""
    for _ in range(max_rounds):
        for candidate in reductions(m):
            if still_fails(candidate):
                m = candidate
                break
        else:
            return m
    return m
