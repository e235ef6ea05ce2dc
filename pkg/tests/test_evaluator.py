import itertools

import pytest

from mupuppet import CompileError, ErrorKind, Limits, compile, parse_expression, parse_manifest
from mupuppet import syntax as S
from mupuppet.environments import (
    EMPTY_DEFS,
    EMPTY_VARS,
    ClassDefinition,
    DeclaredClass,
    ResourceDefinition,
    env_get,
    env_update,
)
from mupuppet.evaluator import (
    EXPR,
    MANIFEST,
    STMT,
    Configuration,
    case_match,
    node_match,
    step,
    step_expr,
    step_manifest,
    step_stmt,
)
from mupuppet.values import EMPTY_CATALOG, ResourceValue, catalog_append

from helpers import CLASS_PARAMETERS, THREE_SERVICES, catalog_tuples, run

I, W = S.IntLit, S.StrLit


def evaluate(e, sigma=EMPTY_VARS, kappa=EMPTY_DEFS, catalog=EMPTY_CATALOG, scope=S.TOP):
    """Step an expression to a value; returns (value, rule names)."""
    rules = []
    config = Configuration(sigma, kappa, catalog, e, scope)
    while True:
        out = step(config)
        if out is None:
            return config.term, rules
        config, path = out
        assert (config.sigma, config.kappa, config.catalog) == (sigma, kappa, catalog)
        rules.append(path[-1])


def rules_of(result):
    return [r.rule for r in result.trace.records]


# -- expressions ---------------------------------------------------------------


def test_arith_value():
    assert step_expr(EMPTY_VARS, EMPTY_DEFS, EMPTY_CATALOG, parse_expression("1 + 2"), S.TOP) == I(3)
    assert evaluate(parse_expression("1 + 2"))[1] == ["ArithValue"]


def test_parent_scope_lookup_from_node():
    sigma = env_update(EMPTY_VARS, S.TOP, "x", I(7))
    config = Configuration(sigma, EMPTY_DEFS, EMPTY_CATALOG, S.Var("x"), S.NODE)
    after, path = step(config)
    assert after.term == I(7)
    assert path == ("PVar", "LVar")


def test_array_index_is_zero_based():
    assert evaluate(parse_expression("[10,20,30][1]"))[0] == I(20)


def test_resource_attribute_dereference():
    c = catalog_append(EMPTY_CATALOG, ResourceValue("file", "foo.txt", (("owner", W("alice")),)))
    value, rules = evaluate(parse_expression('File["foo.txt"]["owner"]'), catalog=c)
    assert value == W("alice")
    assert rules == ["DeRefRes"]


def _selector_oracle(arms):
    """Rule sequence and result for subject 'a' over hit/miss/default arms."""
    rules = []
    for i, kind in enumerate(arms):
        if kind == "hit":
            return rules + ["SChooseI"], I(i)
        if kind == "default":
            return rules + ["SDefault"], I(i)
        rules.append("SChooseII")
    return rules, None


@pytest.mark.parametrize("arms", list(itertools.product(["hit", "miss", "default"], repeat=2)))
def test_selector_traces(arms):
    labels = {"hit": W("a"), "miss": W("b"), "default": S.DEFAULT}
    e = S.Selector(W("a"), tuple((labels[k], I(i)) for i, k in enumerate(arms)))
    want_rules, want_value = _selector_oracle(arms)
    if want_value is None:
        with pytest.raises(CompileError) as info:
            evaluate(e)
        assert info.value.kind is ErrorKind.SelectorNoMatch
    else:
        assert evaluate(e) == (want_value, want_rules)


def test_selector_computed_subject_and_label():
    value, rules = evaluate(parse_expression("1 + 1 ? { 1 + 1 => 'two', default => 'other' }"))
    assert value == W("two")
    assert rules[:2] == ["ArithValue", "ArithValue"]
    assert rules[-1] == "SChooseI"


@pytest.mark.parametrize("source, kind", [
    ("$nope", ErrorKind.UndefinedVariable),
    ("true + 1", ErrorKind.TypeMismatch),
    ("'a' > 'b'", ErrorKind.TypeMismatch),
    ("!1", ErrorKind.TypeMismatch),
    ("1 and true", ErrorKind.TypeMismatch),
    ("1 / 0", ErrorKind.DivisionByZero),
    ("1 % 0", ErrorKind.DivisionByZero),
    ("[1][1]", ErrorKind.BadDereference),
    ("[1][-1]", ErrorKind.BadDereference),
    ("{'a' => 1}['b']", ErrorKind.BadDereference),
    ("File['x']['y']", ErrorKind.BadDereference),
    ("5[0]", ErrorKind.TypeMismatch),
    ("1 ? { 2 => 3 }", ErrorKind.SelectorNoMatch),
    ("$::nope", ErrorKind.UndefinedVariable),
    ("$a::nope", ErrorKind.UndefinedVariable),
])
def test_expression_errors(source, kind):
    with pytest.raises(CompileError) as info:
        evaluate(parse_expression(source))
    assert info.value.kind is kind


@pytest.mark.parametrize("source, value", [
    ("7 / 2", I(3)), ("-7 / 2", I(-4)), ("-7 % 2", I(1)), ("2 * 3 - 4", I(2)),
    ("1 < 2", S.BoolLit(True)), ("2 <= 1", S.BoolLit(False)), ("'a' == 'a'", S.BoolLit(True)),
    ("'A' == 'a'", S.BoolLit(False)), ("1 == '1'", S.BoolLit(False)),
    ("[1, [2]] == [1, [2]]", S.BoolLit(True)), ("true or $nope", S.BoolLit(True)),
    ("false and $nope", S.BoolLit(False)), ("!false", S.BoolLit(True)),
    ("{'a' => 1, 'a' => 2}['a']", I(1)), ("{1 => 'x'}[1]", W("x")),
])
def test_expression_values(source, value):
    assert evaluate(parse_expression(source))[0] == value


def test_and_right_rule_names():
    assert evaluate(parse_expression("false and 1 + 1"))[1] == ["AndRightI"]
    assert evaluate(parse_expression("true and 1 < 2"))[1] == ["CompValueI", "AndValue"]
    assert evaluate(parse_expression("true and false"))[1] == ["AndValueII"]


# -- statements ----------------------------------------------------------------


def test_assignment_steps():
    s = parse_manifest("$x = 1 + 1")
    sigma, kappa, catalog, s1 = step_stmt(EMPTY_VARS, EMPTY_DEFS, EMPTY_CATALOG, s, S.TOP)
    assert s1 == S.Assign("x", I(2)) and sigma == EMPTY_VARS
    sigma, kappa, catalog, s2 = step_stmt(sigma, kappa, catalog, s1, S.TOP)
    assert s2 == S.SKIP and env_get(sigma, S.TOP, "x") == I(2)
    assert step_stmt(sigma, kappa, catalog, s2, S.TOP) is None


def test_include_declared_class_is_noop():
    k = EMPTY_DEFS.set("a", DeclaredClass(S.TOP))
    out = step_stmt(EMPTY_VARS, k, EMPTY_CATALOG, S.Include("a"), S.TOP)
    assert out == (EMPTY_VARS, k, EMPTY_CATALOG, S.SKIP)


def test_include_undeclared_parent_first():
    k = EMPTY_DEFS.set("a", ClassDefinition("b", None, S.SKIP)).set("b", ClassDefinition(None, None, S.SKIP))
    config = Configuration(EMPTY_VARS, k, EMPTY_CATALOG, S.Include("a"), S.TOP)
    after, path = step(config)
    assert path == ("IncPU",)
    assert after.term == S.seq([S.Include("b"), S.Include("a")])
    assert after.kappa == k


def test_include_unknown_class():
    with pytest.raises(CompileError) as info:
        step_stmt(EMPTY_VARS, EMPTY_DEFS, EMPTY_CATALOG, S.Include("a"), S.TOP)
    assert info.value.kind is ErrorKind.UndefinedDefinition


def test_defined_resource_body():
    body = S.ResourceDecl("file", S.Var("title"), ())
    k = EMPTY_DEFS.set("d", ResourceDefinition((S.Param("x"), S.Param("y", I(2))), body))
    decl = S.ResourceDecl("d", W("t"), (("x", I(1)),))
    _, _, _, s = step_stmt(EMPTY_VARS, k, EMPTY_CATALOG, decl, S.TOP)
    assert s == S.ScopeStmt(S.DefScope(S.TOP), S.seq([
        S.Assign("title", W("t")), S.Assign("x", I(1)), S.Assign("y", I(2)), S.SKIP, body]))


def test_resource_like_redeclaration():
    k = EMPTY_DEFS.set("a", DeclaredClass(S.TOP))
    with pytest.raises(CompileError) as info:
        step_stmt(EMPTY_VARS, k, EMPTY_CATALOG, S.ClassDecl("a", ()), S.TOP)
    assert info.value.kind is ErrorKind.ClassAlreadyDeclared


def test_resource_title_evaluated_before_attributes():
    decl = S.ResourceDecl("file", parse_expression("1 + 1"), (("a", I(2)),))
    config = Configuration(EMPTY_VARS, EMPTY_DEFS, EMPTY_CATALOG, decl, S.TOP)
    after, path = step(config, judgement=STMT)
    assert path == ("ResStep", "ResTitle", "ArithValue")
    assert after.term.title == I(2)


def test_attributes_step_left_to_right():
    sigma = env_update(EMPTY_VARS, S.TOP, "x", I(9))
    decl = S.ResourceDecl("file", W("t"), (("a", parse_expression("1 + 1")), ("b", S.Var("x"))))
    config = Configuration(sigma, EMPTY_DEFS, EMPTY_CATALOG, decl, S.TOP)
    c1, p1 = step(config)
    assert p1 == ("ResStep", "ResStepI", "ResStepII", "ArithValue")
    c2, p2 = step(c1)
    assert p2 == ("ResStep", "ResStepI", "ResStepIII", "ResStepII", "LVar")
    c3, p3 = step(c2)
    assert p3 == ("ResDecl",)
    assert c3.catalog == (ResourceValue("file", "t", (("a", I(2)), ("b", I(9)))),)


def test_fully_evaluated_body_steps_to_declaration_only():
    decl = S.ResourceDecl("file", W("t"), (("a", I(1)),))
    _, path = step(Configuration(EMPTY_VARS, EMPTY_DEFS, EMPTY_CATALOG, decl, S.TOP))
    assert path == ("ResDecl",)


# -- manifests -----------------------------------------------------------------


def test_node_match_and_no_match():
    m = parse_manifest("node 'n' { $x = 1 }")
    out = step_manifest(EMPTY_VARS, EMPTY_DEFS, EMPTY_CATALOG, m, "n")
    assert out[3] == S.ScopeStmt(S.NODE, S.Assign("x", I(1)))
    assert step_manifest(EMPTY_VARS, EMPTY_DEFS, EMPTY_CATALOG, m, "m")[3] == S.SKIP


def test_define_and_class_definitions():
    _, k, _, m = step_manifest(EMPTY_VARS, EMPTY_DEFS, EMPTY_CATALOG,
                               parse_manifest("define d ($x) { }"), "n")
    assert m == S.SKIP and k["d"] == ResourceDefinition((S.Param("x"),), S.SKIP)
    _, k, _, _ = step_manifest(EMPTY_VARS, EMPTY_DEFS, EMPTY_CATALOG,
                               parse_manifest("class a ($p = 1) inherits b { }"), "n")
    assert k["a"] == ClassDefinition("b", (S.Param("p", I(1)),), S.SKIP)


def test_class_definition_rule_names():
    src = "class a { }\nclass b ($x = 1) { }\nclass c inherits a { }\nclass d ($y = 1) inherits a { }"
    rules = [r for r in rules_of(run(src, trace=True)) if r != "MSeqSkip"]
    assert rules == ["CDef", "CDefP", "CDefI", "CDefPI"]


@pytest.mark.parametrize("v, c, expected", [
    (I(1), I(1), True), (W("Debian"), W("RedHat"), False), (W("x"), S.DEFAULT, True),
    (I(1), W("1"), False),
])
def test_case_match(v, c, expected):
    assert case_match(v, c) is expected


@pytest.mark.parametrize("name, spec, expected", [
    ("ssh.example.com", S.NodeName("ssh.example.com"), True),
    ("x", S.NodeDefault(), True),
    ("c", S.NodeList(("a", "b")), False),
    ("b", S.NodeList(("a", "b")), True),
])
def test_node_match(name, spec, expected):
    assert node_match(name, spec) is expected


# -- compile -------------------------------------------------------------------


def test_ssh_example(ssh_source):
    r = run(ssh_source, "ssh.example.com", {"osfamily": "Debian"})
    assert catalog_tuples(r.catalog) == [("package", "ssh", {"ensure": "installed"})]


def test_three_services_is_not_legal():
    with pytest.raises(CompileError) as info:
        run(THREE_SERVICES)
    assert info.value.kind is ErrorKind.UndefinedDefinition




def test_class_parameters_read_path_before_assignment():
    with pytest.raises(CompileError) as info:
        run(CLASS_PARAMETERS, trace=True)
    err = info.value
    assert err.kind is ErrorKind.UndefinedVariable and "$path" in str(err)
    # the failing evaluation is the argument list of the class declaration
    last = err.trace.records[-1]
    assert "CDecStep" in last.path


def test_empty_manifest():
    r = run("")
    assert r.catalog == () and r.steps == 0


def test_facts_are_top_scope_bindings():
    r = run("file { 'f': a => $os, b => $::os }", facts=[("os", W("Debian"))])
    assert catalog_tuples(r.catalog) == [("file", "f", {"a": "Debian", "b": "Debian"})]
    with pytest.raises(CompileError) as info:
        run("$os = 'x'", facts={"os": "Debian"})
    assert info.value.kind is ErrorKind.DuplicateVariable


def test_step_limit():
    with pytest.raises(CompileError) as info:
        run("$a = 1\n$b = 2", limits=Limits(max_steps=2))
    assert info.value.kind is ErrorKind.StepLimitExceeded
    assert run("$a = 1\n$b = 2", limits=Limits(max_steps=3)).steps == 3


def _chain_is_cyclic(parents, start="a"):
    seen, c = set(), start
    while c is not None:
        if c in seen:
            return True
        seen.add(c)
        c = parents[c]
    return False


GRAPHS = [{"a": p} for p in (None, "a")] + [
    {"a": pa, "b": pb} for pa, pb in itertools.product((None, "a", "b"), repeat=2)
]


@pytest.mark.parametrize("parents", GRAPHS, ids=str)
def test_inheritance_graphs(parents):
    defs = "\n".join(
        f"class {c}" + (f" inherits {p}" if p else "") + f" {{ notify {{ '{c}': }} }}"
        for c, p in parents.items())
    src = defs + "\ninclude a"
    if _chain_is_cyclic(parents):
        with pytest.raises(CompileError) as info:
            run(src)
        assert info.value.kind is ErrorKind.InheritanceCycle
        with pytest.raises(CompileError) as info:
            run(src, limits=Limits(max_steps=5000, paper_divergence=True))
        assert info.value.kind is ErrorKind.StepLimitExceeded
    else:
        chain, c = [], "a"
        while c is not None:
            chain.append(c)
            c = parents[c]
        assert [t for _, t, _ in catalog_tuples(run(src).catalog)] == chain[::-1]


def test_paper_divergence_runs_deep_without_recursion_limits():
    src = "class a inherits a { }\ninclude a"
    with pytest.raises(CompileError) as info:
        run(src, limits=Limits(max_steps=100_000, paper_divergence=True))
    assert info.value.kind is ErrorKind.StepLimitExceeded


def test_node_scope_dynamics():
    cls = "class app { file { 'app': owner => $owner } }\n"
    ok = run(cls + "node default { $owner = 'alice'\n include app }")
    assert catalog_tuples(ok.catalog) == [("file", "app", {"owner": "alice"})]
    assert ok.kappa["app"] == DeclaredClass(S.NODE)
    with pytest.raises(CompileError) as info:
        run(cls + "include app\nnode default { $owner = 'alice'\n include app }")
    assert info.value.kind is ErrorKind.UndefinedVariable


def test_def_scope_parent_is_base_scope():
    src = "define d() { file { $title: v => $v } }\nclass c { $v = 'class'\n d { 'x': } }\n" \
          "node default { $v = 'node'\n include c }"
    r = run(src)
    # def(::c) has base ::nd, so the class-scope $v is not visible
    assert catalog_tuples(r.catalog) == [("file", "x", {"v": "node"})]


def test_include_idempotence_pairs():
    src = "class a { file { 'f': } }\nclass b { include a\n notify { 'b': } }\n"
    single = run(src + "include b\nnotify { 'end': }").catalog
    double = run(src + "include b\ninclude b\nnotify { 'end': }").catalog
    assert single == double


@pytest.mark.parametrize("src, kind", [
    ("file { 'a': }\nfile { 'a': }", ErrorKind.DuplicateResource),
    ("class a { }\ninclude a\nclass { a: }", ErrorKind.ClassAlreadyDeclared),
    ("$x = 1\n$x = 2", ErrorKind.DuplicateVariable),
    ("class a { }\nclass a { }", ErrorKind.DuplicateDefinition),
    ("define a() { }\nclass a { }", ErrorKind.DuplicateDefinition),
    ("fail('no')", ErrorKind.ExplicitFailure),
    ("include nosuch", ErrorKind.UndefinedDefinition),
    ("nosuch { 'x': }", ErrorKind.UndefinedDefinition),
    ("class a { }\na { 'x': }", ErrorKind.UndefinedDefinition),
    ("define d() { }\ninclude d", ErrorKind.UndefinedDefinition),
])
def test_statement_errors(src, kind):
    with pytest.raises(CompileError) as info:
        run(src)
    assert info.value.kind is kind


def test_errors_carry_position_and_scope():
    with pytest.raises(CompileError) as info:
        run("class a {\n  $y = $nope\n}\ninclude a")
    err = info.value
    assert err.pos == S.Pos(2, 8)
    assert err.scope == S.ClassScope("a")
    assert str(err).startswith("2:8: UndefinedVariable")


def test_def_scope_bindings_are_cleared():
    r = run("define d() { $local = 1 }\nd { 'a': }\nd { 'b': }")
    assert not any(isinstance(scope, S.DefScope) for scope in r.sigma)


def test_trace_records():
    r = run("class a { }\nnode default { include a }", trace=True)
    recs = r.trace.records
    assert [x.index for x in recs] == list(range(1, len(recs) + 1))
    assert {x.judgement for x in recs} <= {EXPR, STMT, MANIFEST}
    inc = next(x for x in recs if x.rule == "IncU")
    assert inc.scope == "::nd" and inc.path == ("TopScope", "ScopeStep", "IncU")
    assert recs[-1].to_json() == {
        "step": len(recs), "judgement": "STMT", "rule": "ScopeDone", "path": ["TopScope", "ScopeDone"],
        "scope": "::", "term": "scope ::nd { skip }"}


def test_compile_is_deterministic(ssh_source):
    a = run(ssh_source, "ssh.example.com", {"osfamily": "RedHat"}, trace=True)
    b = run(ssh_source, "ssh.example.com", {"osfamily": "RedHat"}, trace=True)
    assert a.catalog == b.catalog and a.trace.records == b.trace.records
