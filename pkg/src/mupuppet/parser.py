"""Lexer and recursive-descent parser for manifest source.

Operator precedence, tightest first: unary ``!``/``-``, postfix ``[...]``
binds tighter still; ``* / %``; ``+ -``; comparisons; ``and``; ``or``;
selector ``?`` applies to the completed expression on its left. All binary
levels are left-associative.

Constructs outside the supported language (regex node specs, interpolated
strings, ``undef``, collectors, chaining arrows, nested definitions, ...)
raise ``ParseError`` rather than being skipped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, List, Optional

from . import syntax as S


class ParseError(Exception):
    def __init__(self, line: int, col: int, expected: str, lexeme: str, message: str = ""):
        self.line = line
        self.col = col
        self.expected = expected
        self.lexeme = lexeme
        if not message:
            message = f"expected {expected}, found {lexeme}"
        self.message = message
        super().__init__(f"{line}:{col}: {message}")

    @property
    def pos(self) -> S.Pos:
        return S.Pos(self.line, self.col)


@dataclass
class Token:
    kind: str  # INT STRING VAR WORD CAPWORD PUNCT EOF
    text: str
    value: object
    line: int
    col: int
    spaced: bool  # preceded by whitespace or a comment

    def describe(self) -> str:
        if self.kind == "EOF":
            return "end of input"
        return repr(self.text)


# Longest first so that e.g. "<<|" wins over "<<" and "<".
_PUNCT = sorted(
    """<<| |>> <| |> -> ~> => == != >= <= << >> =~ !~ +> @@
    { } [ ] ( ) , : ; = ! > < + - * / % ? @ | ~ .""".split(),
    key=len,
    reverse=True,
)

_NAME = r"[a-z_][a-zA-Z0-9_]*"
_WORD_RE = re.compile(rf"(?:::)?{_NAME}(?:::{_NAME})*")
_CAPWORD_RE = re.compile(r"(?:::)?[A-Z][a-zA-Z0-9_]*(?:::[A-Z][a-zA-Z0-9_]*)*")
_VAR_RE = re.compile(r"\$((?:::)?[a-zA-Z_][a-zA-Z0-9_]*(?:::[a-zA-Z_][a-zA-Z0-9_]*)*)")
_INT_RE = re.compile(r"[0-9]+(?![a-zA-Z0-9_])")
_STRING_ESCAPES = {"\\": "\\", "'": "'", '"': '"', "n": "\n", "t": "\t"}

KEYWORDS = frozenset(
    """and or if else elsif unless case default class define node include
    inherits true false undef in function type attr private application
    consumes produces site unit scope skip""".split()
)


def _unsupported(tok: Token, what: str) -> ParseError:
    return ParseError(tok.line, tok.col, "a supported construct", tok.describe(),
                      f"{what} are not supported")


def tokenize(source: str) -> List[Token]:
    tokens: List[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)
    spaced = True

    def advance(text: str):
        nonlocal i, line, col
        for ch in text:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += len(text)

    while i < n:
        ch = source[i]
        if ch in " \t\r\n\f\v":
            advance(ch)
            spaced = True
            continue
        if ch == "#":
            end = source.find("\n", i)
            advance(source[i:] if end < 0 else source[i:end])
            spaced = True
            continue
        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end < 0:
                raise ParseError(line, col, "'*/'", "end of input", "unterminated comment")
            advance(source[i:end + 2])
            spaced = True
            continue

        start_line, start_col = line, col
        if ch in "'\"":
            text, value = _lex_string(source, i, line, col)
            tok = Token("STRING", text, value, start_line, start_col, spaced)
        elif ch == "$":
            m = _VAR_RE.match(source, i)
            if not m:
                raise ParseError(line, col, "a variable name", repr(source[i:i + 2]))
            tok = Token("VAR", m.group(0), m.group(1), start_line, start_col, spaced)
        elif "0" <= ch <= "9":
            m = _INT_RE.match(source, i)
            if not m:
                bad = re.match(r"[0-9][a-zA-Z0-9_.]*", source[i:]).group(0)
                raise ParseError(line, col, "an integer", repr(bad),
                                 f"malformed number {bad!r} (only decimal integers are supported)")
            tok = Token("INT", m.group(0), int(m.group(0)), start_line, start_col, spaced)
        elif ch.isalpha() or ch == "_" or source.startswith("::", i):
            m = _WORD_RE.match(source, i)
            kind = "WORD"
            if not m:
                m = _CAPWORD_RE.match(source, i)
                kind = "CAPWORD"
            if not m:
                raise ParseError(line, col, "a name", repr(source[i:i + 3]))
            text = m.group(0)
            tok = Token(kind, text, text, start_line, start_col, spaced)
        else:
            for p in _PUNCT:
                if source.startswith(p, i):
                    tok = Token("PUNCT", p, p, start_line, start_col, spaced)
                    break
            else:
                raise ParseError(line, col, "a token", repr(ch), f"unexpected character {ch!r}")
        tokens.append(tok)
        advance(tok.text)
        spaced = False
    tokens.append(Token("EOF", "", None, line, col, spaced))
    return tokens


def _lex_string(source: str, i: int, line: int, col: int):
    quote = source[i]
    j = i + 1
    out = []
    while j < len(source):
        ch = source[j]
        if ch == quote:
            return source[i:j + 1], "".join(out)
        if ch == "\\" and j + 1 < len(source):
            nxt = source[j + 1]
            if nxt in _STRING_ESCAPES:
                out.append(_STRING_ESCAPES[nxt])
                j += 2
                continue
            if quote == '"' and nxt == "$":
                out.append("$")
                j += 2
                continue
            out.append(ch)
            j += 1
            continue
        if quote == '"' and ch == "$":
            # line/col of the '$' for the diagnostic
            prefix = source[i:j]
            l = line + prefix.count("\n")
            c = (j - prefix.rfind("\n")) if "\n" in prefix else col + (j - i)
            raise ParseError(l, c, "a plain string", repr(source[j:j + 2]),
                             "string interpolation is not supported")
        out.append(ch)
        j += 1
    raise ParseError(line, col, f"closing {quote}", "end of input", "unterminated string")


class Parser:
    def __init__(self, source: str, builtin_types: Iterable[str] = S.BUILTIN_TYPES):
        self.toks = tokenize(source)
        self.i = 0
        self.builtin_types = frozenset(builtin_types)

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str, kind: Optional[str] = None) -> bool:
        t = self.tok
        if kind is not None and t.kind != kind:
            return False
        return t.text == text and t.kind in ("PUNCT", "WORD")

    def at_kw(self, word: str) -> bool:
        return self.tok.kind == "WORD" and self.tok.text == word

    def next(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.i += 1
        return t

    def error(self, expected: str, tok: Optional[Token] = None, message: str = "") -> ParseError:
        tok = tok or self.tok
        return ParseError(tok.line, tok.col, expected, tok.describe(), message)

    def expect(self, text: str) -> Token:
        if self.tok.kind == "PUNCT" and self.tok.text == text:
            return self.next()
        raise self.error(repr(text))

    def expect_kw(self, word: str) -> Token:
        if self.at_kw(word):
            return self.next()
        raise self.error(repr(word))

    def pos(self, tok: Optional[Token] = None) -> S.Pos:
        tok = tok or self.tok
        return S.Pos(tok.line, tok.col)

    def punct(self, text: str) -> bool:
        return self.tok.kind == "PUNCT" and self.tok.text == text

    # -- manifests ----------------------------------------------------------

    def parse_manifest(self) -> S.Manifest:
        items = []
        while self.tok.kind != "EOF":
            items.append(self.top_item())
        return S.mseq(items)

    def top_item(self) -> S.Manifest:
        if self.at_kw("node"):
            return self.node_def()
        if self.at_kw("define"):
            return self.define_def()
        if self.at_kw("class") and self.peek().kind == "WORD":
            return self.class_def()
        return self.statement()

    def node_def(self) -> S.NodeDef:
        start = self.next()
        spec = self.node_spec()
        body = self.block()
        return S.NodeDef(spec, body, pos=self.pos(start))

    def node_name(self) -> str:
        t = self.tok
        if t.kind == "STRING":
            self.next()
            return t.value
        if t.kind == "WORD" and t.text not in KEYWORDS and "::" not in t.text:
            self.next()
            return t.text
        if t.kind == "PUNCT" and t.text == "/":
            raise _unsupported(t, "regular-expression node specifiers")
        raise self.error("a node name")

    def node_spec(self) -> S.NodeSpec:
        start = self.tok
        if self.at_kw("default"):
            self.next()
            return S.NodeDefault(pos=self.pos(start))
        if self.punct("("):
            self.next()
            names = [self.node_name()]
            while self.punct(","):
                self.next()
                if self.punct(")"):
                    break
                names.append(self.node_name())
            self.expect(")")
            return S.NodeList(tuple(names), pos=self.pos(start))
        names = [self.node_name()]
        while self.punct(","):
            self.next()
            names.append(self.node_name())
        if len(names) == 1:
            return S.NodeName(names[0], pos=self.pos(start))
        return S.NodeList(tuple(names), pos=self.pos(start))

    def define_def(self) -> S.DefineDef:
        start = self.next()
        name = self.definition_name()
        params: S.Params = ()
        if self.punct("("):
            params = self.params()
        body = self.block()
        return S.DefineDef(name, params, body, pos=self.pos(start))

    def class_def(self) -> S.ClassDef:
        start = self.next()
        name = self.definition_name()
        params = None
        parent = None
        if self.punct("("):
            params = self.params()
        if self.at_kw("inherits"):
            self.next()
            parent = self.class_name()
        body = self.block()
        return S.ClassDef(name, params, parent, body, pos=self.pos(start))

    def definition_name(self) -> str:
        t = self.tok
        if t.kind == "WORD" and t.text not in KEYWORDS:
            self.next()
            return t.text.lstrip(":")
        raise self.error("a name")

    def class_name(self) -> str:
        t = self.tok
        if t.kind == "STRING" and _WORD_RE.fullmatch(t.value):
            self.next()
            return t.value.lstrip(":")
        if t.kind == "WORD" and t.text not in KEYWORDS:
            self.next()
            return t.text.lstrip(":")
        raise self.error("a class name")

    def params(self) -> S.Params:
        self.expect("(")
        params: List[S.Param] = []
        seen = set()
        while not self.punct(")"):
            t = self.tok
            if t.kind == "CAPWORD":
                raise _unsupported(t, "data type annotations")
            if t.kind != "VAR":
                raise self.error("a parameter")
            name = t.value
            if "::" in name:
                raise self.error("an unqualified parameter name", t)
            if name in seen:
                raise ParseError(t.line, t.col, "a fresh parameter name", t.describe(),
                                 f"duplicate parameter ${name}")
            seen.add(name)
            self.next()
            default = None
            if self.punct("="):
                self.next()
                default = self.expression()
            params.append(S.Param(name, default, pos=self.pos(t)))
            if not self.punct(","):
                break
            self.next()
        self.expect(")")
        return tuple(params)

    # -- statements ---------------------------------------------------------

    def block(self) -> S.Statement:
        self.expect("{")
        stmts = []
        while not self.punct("}"):
            if self.tok.kind == "EOF":
                raise self.error("'}'")
            stmts.append(self.statement(in_body=True))
        self.next()
        return S.seq(stmts)

    def statement(self, in_body: bool = False) -> S.Statement:
        s = self._statement(in_body)
        if self.tok.kind == "PUNCT" and self.tok.text in ("->", "~>"):
            raise _unsupported(self.tok, "chaining arrows")
        return s

    def _statement(self, in_body: bool) -> S.Statement:
        t = self.tok
        if t.kind == "WORD":
            word = t.text
            if word == "class":
                if self.peek().kind == "PUNCT" and self.peek().text == "{":
                    return self.class_decl()
                raise ParseError(t.line, t.col, "a statement", t.describe(),
                                 "nested class definitions are not supported")
            if word in ("define", "node"):
                raise ParseError(t.line, t.col, "a statement", t.describe(),
                                 f"'{word}' is only allowed at the top level")
            if word == "include":
                self.next()
                name = self.class_name()
                if self.punct(","):
                    raise _unsupported(self.tok, "multiple classes in one include")
                return S.Include(name, pos=self.pos(t))
            if word == "if":
                return self.if_stmt()
            if word == "unless":
                return self.unless_stmt()
            if word == "case":
                return self.case_stmt()
            if word == "fail" and self.peek().kind == "PUNCT" and self.peek().text == "(":
                self.next()
                self.next()
                msg = self.expression()
                self.expect(")")
                return S.Fail(msg, pos=self.pos(t))
            if word == "elsif":
                raise _unsupported(t, "'elsif' branches")
            if word in ("scope", "skip"):
                raise ParseError(t.line, t.col, "a statement", t.describe(),
                                 f"'{word}' is internal and cannot appear in source")
            if word not in KEYWORDS:
                nxt = self.peek()
                if nxt.kind == "PUNCT" and nxt.text == "{":
                    return self.resource_decl()
                if nxt.kind == "PUNCT" and nxt.text == "(":
                    raise _unsupported(t, "function calls")
                raise _unsupported(t, "bare-word statements and function calls")
        if t.kind == "VAR" and self.peek().kind == "PUNCT" and self.peek().text == "=":
            if "::" in t.value:
                raise ParseError(t.line, t.col, "an unqualified variable", t.describe(),
                                 "cannot assign to a qualified variable")
            self.next()
            self.next()
            return S.Assign(t.value, self.expression(), pos=self.pos(t))
        if t.kind == "CAPWORD":
            nxt = self.peek()
            if nxt.kind == "PUNCT" and nxt.text == "{":
                raise _unsupported(t, "resource defaults")
            if nxt.kind == "PUNCT" and nxt.text in ("<|", "<<|"):
                raise _unsupported(nxt, "resource collectors")
        if t.kind == "PUNCT" and t.text in ("@", "@@"):
            raise _unsupported(t, "virtual and exported resources")
        e = self.expression()
        if self.punct("{"):
            raise _unsupported(self.tok, "resource overrides")
        return e

    def class_decl(self) -> S.ClassDecl:
        start = self.next()
        self.expect("{")
        name = self.class_name()
        self.expect(":")
        attrs = self.attrs()
        self.expect("}")
        return S.ClassDecl(name, attrs, pos=self.pos(start))

    def resource_decl(self) -> S.ResourceDecl:
        head = self.next()
        self.expect("{")
        title = self.expression()
        self.expect(":")
        attrs = self.attrs()
        if self.punct(";"):
            self.next()
            if not self.punct("}"):
                raise _unsupported(self.tok, "multiple resource bodies")
        self.expect("}")
        return S.ResourceDecl(head.text.lstrip(":"), title, attrs, pos=self.pos(head))

    def attrs(self) -> S.Attrs:
        out = []
        seen = set()
        while self.tok.kind == "WORD":
            t = self.next()
            if t.text in seen:
                raise ParseError(t.line, t.col, "a fresh attribute name", t.describe(),
                                 f"duplicate attribute {t.text!r}")
            seen.add(t.text)
            if self.punct("+>"):
                raise _unsupported(self.tok, "attribute appends (+>)")
            self.expect("=>")
            out.append((t.text, self.expression()))
            if not self.punct(","):
                break
            self.next()
        if self.punct("*"):
            raise _unsupported(self.tok, "attribute splats (* =>)")
        return tuple(out)

    def if_stmt(self) -> S.IfElse:
        start = self.next()
        cond = self.expression()
        then = self.block()
        orelse: S.Statement = S.SKIP
        if self.at_kw("elsif"):
            raise _unsupported(self.tok, "'elsif' branches")
        if self.at_kw("else"):
            self.next()
            orelse = self.block()
        return S.IfElse(cond, then, orelse, pos=self.pos(start))

    def unless_stmt(self) -> S.Unless:
        start = self.next()
        cond = self.expression()
        body = self.block()
        if self.at_kw("else"):
            raise _unsupported(self.tok, "'else' branches on unless")
        return S.Unless(cond, body, pos=self.pos(start))

    def case_label(self):
        if self.at_kw("default"):
            self.next()
            return S.DEFAULT
        return self.expression()

    def case_stmt(self) -> S.CaseStmt:
        start = self.next()
        subject = self.expression()
        self.expect("{")
        arms = []
        while not self.punct("}"):
            label = self.case_label()
            if self.punct(","):
                raise _unsupported(self.tok, "multiple values in one case arm")
            self.expect(":")
            arms.append((label, self.block()))
        self.next()
        return S.CaseStmt(subject, tuple(arms), pos=self.pos(start))

    # -- expressions --------------------------------------------------------

    def expression(self) -> S.Expression:
        e = self.or_expr()
        while self.punct("?"):
            q = self.next()
            self.expect("{")
            arms = []
            while not self.punct("}"):
                label = self.case_label()
                self.expect("=>")
                arms.append((label, self.expression()))
                if not self.punct(","):
                    break
                self.next()
            self.expect("}")
            e = S.Selector(e, tuple(arms), pos=e.pos or self.pos(q))
        return e

    def _binary(self, ops, operand) -> S.Expression:
        left = operand()
        while (self.tok.kind == "PUNCT" or self.tok.kind == "WORD") and self.tok.text in ops:
            op = self.next().text
            right = operand()
            left = S.BinOp(op, left, right, pos=left.pos)
        return left

    def or_expr(self):
        return self._binary(("or",), self.and_expr)

    def and_expr(self):
        return self._binary(("and",), self.compare_expr)

    def compare_expr(self):
        e = self._binary(S.COMPARISON_OPS, self.add_expr)
        if self.tok.kind == "PUNCT" and self.tok.text in ("=~", "!~"):
            raise _unsupported(self.tok, "regular-expression matches")
        if self.at_kw("in"):
            raise _unsupported(self.tok, "'in' expressions")
        return e

    def add_expr(self):
        return self._binary(("+", "-"), self.mul_expr)

    def mul_expr(self):
        e = self._binary(("*", "/", "%"), self.unary_expr)
        if self.tok.kind == "PUNCT" and self.tok.text in ("<<", ">>"):
            raise _unsupported(self.tok, "shift operators")
        return e

    def unary_expr(self):
        t = self.tok
        if self.punct("!"):
            self.next()
            return S.Not(self.unary_expr(), pos=self.pos(t))
        if self.punct("-"):
            self.next()
            if self.tok.kind == "INT":
                lit = self.next()
                return self.postfix(S.IntLit(-lit.value, pos=self.pos(t)))
            operand = self.unary_expr()
            return S.BinOp("-", S.IntLit(0, pos=self.pos(t)), operand, pos=self.pos(t))
        return self.postfix(self.primary())

    def postfix(self, e):
        while self.punct("[") and not self.tok.spaced:
            self.next()
            index = self.expression()
            if self.punct(","):
                raise _unsupported(self.tok, "multi-index access")
            self.expect("]")
            e = S.Deref(e, index, pos=e.pos)
        return e

    def primary(self) -> S.Expression:
        t = self.tok
        p = self.pos(t)
        if t.kind == "INT":
            self.next()
            return S.IntLit(t.value, pos=p)
        if t.kind == "STRING":
            self.next()
            return S.StrLit(t.value, pos=p)
        if t.kind == "VAR":
            self.next()
            return _variable(t.value, p)
        if t.kind == "CAPWORD":
            return self.resource_ref()
        if t.kind == "WORD":
            word = t.text
            if word in ("true", "false"):
                self.next()
                return S.BoolLit(word == "true", pos=p)
            if word == "undef":
                raise _unsupported(t, "undef values")
            if word in KEYWORDS:
                raise self.error("an expression")
            nxt = self.peek()
            if nxt.kind == "PUNCT" and nxt.text == "(" and not nxt.spaced:
                raise _unsupported(t, "function calls")
            self.next()
            return S.StrLit(word.lstrip(":") if word.startswith("::") else word, pos=p)
        if t.kind == "PUNCT":
            if t.text == "(":
                self.next()
                e = self.expression()
                self.expect(")")
                return e
            if t.text == "[":
                return self.array()
            if t.text == "{":
                return self.hash()
            if t.text == "/":
                raise _unsupported(t, "regular expressions")
            if t.text == "|":
                raise _unsupported(t, "lambdas")
        raise self.error("an expression")

    def resource_ref(self) -> S.ResourceRef:
        t = self.next()
        type_name = t.text.lstrip(":").lower()
        if not self.punct("["):
            if self.punct("<|") or self.punct("<<|"):
                raise _unsupported(self.tok, "resource collectors")
            raise ParseError(t.line, t.col, "a resource reference", t.describe(),
                             "data types are not supported; a capitalized name must start a resource reference")
        if type_name not in self.builtin_types:
            raise ParseError(t.line, t.col, "a built-in resource type", t.describe(),
                             f"unknown resource type {t.text!r} in reference")
        self.next()
        title = self.expression()
        if self.punct(","):
            raise _unsupported(self.tok, "multiple resource titles")
        self.expect("]")
        return S.ResourceRef(type_name, title, pos=self.pos(t))

    def array(self) -> S.ArrayExpr:
        start = self.next()
        items = []
        while not self.punct("]"):
            items.append(self.expression())
            if not self.punct(","):
                break
            self.next()
        self.expect("]")
        return S.ArrayExpr(tuple(items), pos=self.pos(start))

    def hash_key(self):
        t = self.tok
        if t.kind == "STRING":
            self.next()
            return t.value
        if t.kind == "INT":
            self.next()
            return t.value
        if self.punct("-") and self.peek().kind == "INT":
            self.next()
            return -self.next().value
        if t.kind == "WORD" and t.text not in KEYWORDS:
            self.next()
            return t.text
        raise self.error("a hash key (integer or string)")

    def hash(self) -> S.HashExpr:
        start = self.next()
        entries = []
        while not self.punct("}"):
            key = self.hash_key()
            self.expect("=>")
            entries.append((key, self.expression()))
            if not self.punct(","):
                break
            self.next()
        self.expect("}")
        return S.HashExpr(tuple(entries), pos=self.pos(start))


def _variable(name: str, pos: S.Pos) -> S.Expression:
    if name.startswith("::"):
        parts = name[2:].split("::")
        if len(parts) == 1:
            return S.TopVar(parts[0], pos=pos)
    else:
        parts = name.split("::")
        if len(parts) == 1:
            return S.Var(parts[0], pos=pos)
    return S.QualVar("::".join(parts[:-1]), parts[-1], pos=pos)


def parse_manifest(source: str, builtin_types: Iterable[str] = S.BUILTIN_TYPES) -> S.Manifest:
    return Parser(source, builtin_types).parse_manifest()


def parse_expression(source: str, builtin_types: Iterable[str] = S.BUILTIN_TYPES) -> S.Expression:
    p = Parser(source, builtin_types)
    e = p.expression()
    if p.tok.kind != "EOF":
        raise p.error("end of input")
    return e
