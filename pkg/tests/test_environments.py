import pytest
from hypothesis import given
from hypothesis import strategies as st

from mupuppet import syntax as S
from mupuppet.environments import (
    EMPTY_DEFS,
    EMPTY_VARS,
    ClassDefinition,
    DeclaredClass,
    UndefinedParent,
    base_of,
    env_clear,
    env_get,
    env_has,
    env_items,
    env_update,
    merge_params,
    parent_of,
    resolve_variable,
)
from mupuppet.errors import ErrorKind, MissingParameterError, UnknownParameterError

ONE = S.IntLit(1)


def kappa(**entries):
    k = EMPTY_DEFS
    for name, d in entries.items():
        k = k.set(name, d)
    return k


def test_parent_of_node_is_top():
    assert parent_of(EMPTY_DEFS, S.NODE) == S.TOP


def test_parent_of_def_in_node_is_node():
    assert parent_of(EMPTY_DEFS, S.DefScope(S.NODE)) == S.NODE


def test_parent_of_declared_class():
    k = kappa(a=DeclaredClass(S.TOP))
    assert parent_of(k, S.ClassScope("a")) == S.TOP


def test_parent_of_undeclared_class_is_undefined():
    with pytest.raises(UndefinedParent):
        parent_of(kappa(a=ClassDefinition(None, None, S.SKIP)), S.ClassScope("a"))
    with pytest.raises(UndefinedParent):
        parent_of(EMPTY_DEFS, S.TOP)


def test_base_of_examples():
    assert base_of(EMPTY_DEFS, S.TOP) == S.TOP
    assert base_of(EMPTY_DEFS, S.DefScope(S.DefScope(S.NODE))) == S.NODE
    assert base_of(kappa(a=DeclaredClass(S.NODE)), S.ClassScope("a")) == S.NODE


def test_base_of_follows_class_chain():
    k = kappa(a=DeclaredClass(S.ClassScope("b")), b=DeclaredClass(S.NODE))
    assert base_of(k, S.DefScope(S.ClassScope("a"))) == S.NODE


# scopes built over a κ where classes c0..c3 are declared in a chain ending at :: or ::nd
CLASSES = ["c0", "c1", "c2", "c3"]


@st.composite
def declared_world(draw):
    k = EMPTY_DEFS
    declared = []
    for name in CLASSES:
        parent = draw(st.sampled_from([S.TOP, S.NODE] + [S.ClassScope(c) for c in declared]))
        k = k.set(name, DeclaredClass(parent))
        declared.append(name)
    scope = draw(st.sampled_from([S.TOP, S.NODE] + [S.ClassScope(c) for c in CLASSES]))
    for _ in range(draw(st.integers(0, 3))):
        scope = S.DefScope(scope)
    return k, scope


@given(declared_world())
def test_base_of_is_a_projection(world):
    k, scope = world
    b = base_of(k, scope)
    assert b in (S.TOP, S.NODE)
    assert base_of(k, b) == b


@given(declared_world())
def test_parent_chains_reach_top(world):
    k, scope = world
    for _ in range(20):
        if scope == S.TOP:
            break
        scope = parent_of(k, scope)
    assert scope == S.TOP


def test_update_then_read():
    s = env_update(EMPTY_VARS, S.TOP, "x", ONE)
    assert env_get(s, S.TOP, "x") == ONE


def test_update_twice_is_duplicate_variable():
    s = env_update(EMPTY_VARS, S.TOP, "x", ONE)
    with pytest.raises(Exception) as info:
        env_update(s, S.TOP, "x", ONE)
    assert info.value.kind is ErrorKind.DuplicateVariable


def test_update_keys_are_disjoint():
    s = env_update(EMPTY_VARS, S.ClassScope("a"), "x", ONE)
    assert not env_has(s, S.TOP, "x")


def test_clear_examples():
    d = S.DefScope(S.TOP)
    assert env_clear(EMPTY_VARS, d) == EMPTY_VARS
    s = env_update(env_update(EMPTY_VARS, d, "x", ONE), S.TOP, "x", S.IntLit(2))
    cleared = env_clear(s, d)
    assert dict(env_items(cleared)) == {(S.TOP, "x"): S.IntLit(2)}
    assert env_clear(cleared, d) == cleared


scopes = st.sampled_from([S.TOP, S.NODE, S.ClassScope("a"), S.DefScope(S.TOP), S.DefScope(S.NODE)])
bindings = st.dictionaries(st.tuples(scopes, st.sampled_from("xyz")), st.integers(0, 9), max_size=8)


@given(bindings, scopes)
def test_clear_removes_exactly_one_scope(b, target):
    s = EMPTY_VARS
    for (scope, name), v in b.items():
        s = env_update(s, scope, name, S.IntLit(v))
    after = dict(env_items(env_clear(s, target)))
    assert after == {key: S.IntLit(v) for key, v in b.items() if key[0] != target}


def test_resolve_walks_parents():
    s = env_update(EMPTY_VARS, S.TOP, "x", S.IntLit(7))
    value, chain = resolve_variable(s, EMPTY_DEFS, S.NODE, "x")
    assert value == S.IntLit(7) and chain == [S.NODE, S.TOP]


def test_merge_override():
    assert merge_params((S.Param("x"),), (("x", S.IntLit(5)),)) == [S.Assign("x", S.IntLit(5))]


def test_merge_keeps_default_unevaluated():
    default = S.BinOp("+", ONE, ONE)
    assert merge_params((S.Param("x", default),), ()) == [S.Assign("x", default)]


def test_merge_missing_parameter():
    with pytest.raises(MissingParameterError):
        merge_params((S.Param("x"),), ())


def test_merge_unknown_parameter():
    with pytest.raises(UnknownParameterError):
        merge_params((S.Param("x", ONE),), (("y", ONE),))


def test_merge_preserves_parameter_order():
    params = (S.Param("a", ONE), S.Param("b"), S.Param("c", ONE))
    out = merge_params(params, (("c", S.IntLit(3)), ("b", S.IntLit(2))))
    assert [a.name for a in out] == ["a", "b", "c"]
    assert [a.value for a in out] == [ONE, S.IntLit(2), S.IntLit(3)]
