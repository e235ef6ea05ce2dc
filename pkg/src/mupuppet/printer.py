"""Render AST nodes back to manifest source.

Output re-parses to an equal tree for every source-level form. The internal
forms print as ``scope <α> { ... }`` and ``skip`` so traces can show them.
"""

from __future__ import annotations

from . import syntax as S

INDENT = "  "

# Binding strength, loosest first. Parentheses are added whenever a child
# binds more loosely than its position requires.
PREC_SELECTOR = 0
PREC_OR = 1
PREC_AND = 2
PREC_COMPARE = 3
PREC_ADD = 4
PREC_MUL = 5
PREC_UNARY = 6
PREC_POSTFIX = 7

_BINOP_PREC = {
    "or": PREC_OR,
    "and": PREC_AND,
    **{op: PREC_COMPARE for op in S.COMPARISON_OPS},
    "+": PREC_ADD,
    "-": PREC_ADD,
    "*": PREC_MUL,
    "/": PREC_MUL,
    "%": PREC_MUL,
}

_ESCAPES = {"\\": "\\\\", "'": "\\'", "\n": "\\n", "\t": "\\t"}


def quote(text: str) -> str:
    return "'" + "".join(_ESCAPES.get(ch, ch) for ch in text) + "'"


def type_ref_name(type_name: str) -> str:
    return "::".join(seg[:1].upper() + seg[1:] for seg in type_name.split("::"))


def _prec(e) -> int:
    if isinstance(e, S.Selector):
        return PREC_SELECTOR
    if isinstance(e, S.BinOp):
        return _BINOP_PREC[e.op]
    if isinstance(e, S.Not):
        return PREC_UNARY
    if isinstance(e, S.IntLit) and e.value < 0:
        return PREC_UNARY
    return PREC_POSTFIX


def _hash_key(k) -> str:
    return str(k) if isinstance(k, int) else quote(k)


def _case(c) -> str:
    return "default" if c is S.DEFAULT else expr(c)


def expr(e, min_prec: int = PREC_SELECTOR) -> str:
    text = _expr(e)
    if _prec(e) < min_prec:
        return f"({text})"
    return text


def _expr(e) -> str:
    if isinstance(e, S.IntLit):
        return str(e.value)
    if isinstance(e, S.StrLit):
        return quote(e.value)
    if isinstance(e, S.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, S.Var):
        return f"${e.name}"
    if isinstance(e, S.TopVar):
        return f"$::{e.name}"
    if isinstance(e, S.QualVar):
        return f"$::{e.cls}::{e.name}"
    if isinstance(e, S.BinOp):
        p = _BINOP_PREC[e.op]
        return f"{expr(e.left, p)} {e.op} {expr(e.right, p + 1)}"
    if isinstance(e, S.Not):
        return "!" + expr(e.operand, PREC_UNARY)
    if isinstance(e, S.ArrayExpr):
        return "[" + ", ".join(expr(i) for i in e.items) + "]"
    if isinstance(e, S.HashExpr):
        return "{" + ", ".join(f"{_hash_key(k)} => {expr(v)}" for k, v in e.entries) + "}"
    if isinstance(e, S.Deref):
        return f"{expr(e.target, PREC_POSTFIX)}[{expr(e.index)}]"
    if isinstance(e, S.ResourceRef):
        return f"{type_ref_name(e.type)}[{expr(e.title)}]"
    if isinstance(e, S.Selector):
        arms = ", ".join(f"{_case(c)} => {expr(v)}" for c, v in e.arms)
        return f"{expr(e.subject, PREC_SELECTOR)} ? {{ {arms} }}"
    raise TypeError(f"not an expression: {e!r}")


def _attrs(attrs, depth: int) -> str:
    if not attrs:
        return ""
    pad = INDENT * (depth + 1)
    lines = [f"{pad}{name} => {expr(value)}" for name, value in attrs]
    return "\n" + ",\n".join(lines) + "\n" + INDENT * depth


def _block(body, depth: int, internal: bool = False) -> str:
    if isinstance(body, S.Skip) and not internal:
        return "{}"
    inner = stmt(body, depth + 1)
    return "{\n" + inner + "\n" + INDENT * depth + "}"


def stmt(s, depth: int = 0) -> str:
    pad = INDENT * depth
    if isinstance(s, S.Seq):
        return "\n".join(stmt(part, depth) for part in S.flatten_seq(s))
    if isinstance(s, S.Skip):
        return pad + "skip"
    if isinstance(s, S.Assign):
        return f"{pad}${s.name} = {expr(s.value)}"
    if isinstance(s, S.Unless):
        return f"{pad}unless {expr(s.cond)} {_block(s.body, depth)}"
    if isinstance(s, S.IfElse):
        text = f"{pad}if {expr(s.cond)} {_block(s.then, depth)}"
        if not isinstance(s.orelse, S.Skip):
            text += f" else {_block(s.orelse, depth)}"
        return text
    if isinstance(s, S.CaseStmt):
        arms = [f"{pad}{INDENT}{_case(c)}: {_block(b, depth + 1)}" for c, b in s.arms]
        if not arms:
            return f"{pad}case {expr(s.subject)} {{}}"
        return f"{pad}case {expr(s.subject)} {{\n" + "\n".join(arms) + f"\n{pad}}}"
    if isinstance(s, S.ResourceDecl):
        return f"{pad}{s.type} {{ {expr(s.title)}:{_attrs(s.attrs, depth)}}}"
    if isinstance(s, S.ClassDecl):
        return f"{pad}class {{ {s.name}:{_attrs(s.attrs, depth)}}}"
    if isinstance(s, S.Include):
        return f"{pad}include {s.name}"
    if isinstance(s, S.Fail):
        return f"{pad}fail({expr(s.message)})"
    if isinstance(s, S.ScopeStmt):
        return f"{pad}scope {s.scope} {_block(s.body, depth, internal=True)}"
    if isinstance(s, S.EXPRESSION_TYPES):
        text = expr(s)
        # a leading '-' or '{' would continue the previous statement
        return pad + (f"({text})" if text[:1] in "-{" else text)
    raise TypeError(f"not a statement: {s!r}")


def _params(params) -> str:
    parts = []
    for p in params:
        parts.append(f"${p.name}" if p.default is None else f"${p.name} = {expr(p.default)}")
    return "(" + ", ".join(parts) + ")"


def _node_spec(spec) -> str:
    if isinstance(spec, S.NodeDefault):
        return "default"
    if isinstance(spec, S.NodeName):
        return quote(spec.name)
    names = ", ".join(quote(n) for n in spec.names)
    return names if len(spec.names) > 1 else f"({names})"


def manifest(m, depth: int = 0) -> str:
    """Source text for a whole manifest; an empty manifest prints as ''."""
    if isinstance(m, S.Skip) and depth == 0:
        return ""
    if isinstance(m, S.MSeq):
        return "\n".join(manifest(part, depth) for part in S.flatten_mseq(m))
    if isinstance(m, S.NodeDef):
        return f"node {_node_spec(m.spec)} {_block(m.body, depth)}"
    if isinstance(m, S.DefineDef):
        return f"define {m.name} {_params(m.params)} {_block(m.body, depth)}"
    if isinstance(m, S.ClassDef):
        head = f"class {m.name}"
        if m.params is not None:
            head += " " + _params(m.params)
        if m.parent is not None:
            head += f" inherits {m.parent}"
        return f"{head} {_block(m.body, depth)}"
    return stmt(m, depth)


def pretty(term) -> str:
    """Source text for any expression, statement or manifest."""
    if isinstance(term, S.MANIFEST_ONLY_TYPES):
        return manifest(term)
    if isinstance(term, S.EXPRESSION_TYPES):
        return expr(term)
    return stmt(term)


def summary(term, width: int = 80) -> str:
    """One-line rendering for trace records and diagnostics."""
    if isinstance(term, (S.Seq, S.MSeq)):
        # only the head matters to the step; the tail can be the whole program
        head = term.first
        text = " ".join(pretty(head).split()) + " ..."
    else:
        text = " ".join(pretty(term).split())
    if len(text) > width:
        text = text[: width - 3] + "..."
    return text
