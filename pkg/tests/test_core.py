import pytest
from hypothesis import given, strategies as st

from proptree import Env, Value, check, forall, implies, names
from proptree.core import (
    Check,
    ConstructionError,
    Discard,
    Forall,
    Implies,
    Normal,
    RunnerReport,
    TagMismatch,
    UnboundName,
    depth,
    foralls,
    spine,
)
from proptree.rand import RandomSource, const, ints
from proptree.runners import gen_and_run


def test_value_needs_tag():
    with pytest.raises(ValueError):
        Value("", 1)


def test_value_expect_checks_tag():
    v = Value("int", 3)
    assert v.expect("int") == 3
    with pytest.raises(TagMismatch):
        v.expect("tree")


def test_env_lookup_fails_loudly():
    env = Env([("x", Value("int", 1))])
    assert env["x"] == 1
    with pytest.raises(UnboundName):
        env["y"]
    with pytest.raises(KeyError):
        env["y"]


def test_env_names_unique():
    env = Env([("x", Value("int", 1))])
    with pytest.raises(ConstructionError):
        env.bind("x", Value("int", 2))


def test_env_replace_keeps_order_and_tag():
    env = Env([("a", Value("int", 1)), ("b", Value("int", 2))])
    env2 = env.replace("a", Value("int", 9))
    assert list(env2) == ["a", "b"]
    assert env2["a"] == 9 and env["a"] == 1
    with pytest.raises(TagMismatch):
        env.replace("a", Value("bool", True))
    with pytest.raises(UnboundName):
        env.replace("z", Value("int", 0))


def test_env_equality_includes_tags():
    a = Env([("x", Value("int", 1))])
    b = Env([("x", Value("nat", 1))])
    assert a != b
    assert a == Env([("x", Value("int", 1))])


def test_env_prefix():
    env = Env([("a", Value("int", 1)), ("b", Value("int", 2)), ("c", Value("int", 3))])
    assert list(env.prefix(2)) == ["a", "b"]
    assert list(env.prefix(0)) == []


def test_forall_single_quantifier():
    p = forall("x", check(lambda e: True), gen=const(0, "int"))
    assert isinstance(p, Forall) and names(p) == ["x"]


def test_forall_duplicate_name_rejected():
    inner = forall("x", check(lambda e: True), gen=const(0, "int"))
    with pytest.raises(ConstructionError):
        forall("x", inner, gen=const(0, "int"))


def test_forall_body_must_be_property():
    with pytest.raises(ConstructionError):
        forall("x", lambda e: True, gen=const(0, "int"))


def test_names_examples():
    leaf = check(lambda e: True)
    assert names(leaf) == []
    p = forall("x", forall("y", leaf, gen=const(1, "int")), gen=const(0, "int"))
    assert names(p) == ["x", "y"]
    assert names(implies(lambda e: True, forall("z", leaf, gen=const(0, "int")))) == ["z"]


def test_extra_annotations_kept():
    p = forall("x", check(lambda e: True), gen=const(0, "int"), weight=lambda: 3)
    assert p.annotations.extra["weight"]() == 3


def test_report_foundbug_iff_counterexample():
    RunnerReport(True, 1, 0, counterexample="x = 1")
    RunnerReport(False, 1, 0)
    with pytest.raises(ValueError):
        RunnerReport(True, 1, 0)
    with pytest.raises(ValueError):
        RunnerReport(False, 1, 0, counterexample="x = 1")


shapes = st.lists(st.sampled_from(["forall", "implies"]), max_size=8)


def build_shape(shape, calls):
    def pre(e):
        calls.append("pre")
        return True

    def gen_for(name):
        def g(env):
            calls.append("gen")
            return const(0, "int")

        return g

    node = check(lambda e: calls.append("check") or True)
    for i, kind in enumerate(reversed(shape)):
        node = forall(f"v{i}", node, gen=gen_for(i)) if kind == "forall" else implies(pre, node)
    return node


@given(shapes)
def test_spine_depth(shape):
    p = build_shape(shape, [])
    assert depth(p) == shape.count("forall") + shape.count("implies") + 1
    assert type(list(spine(p))[-1]) is Check


@given(shapes)
def test_inspection_runs_nothing(shape):
    calls = []
    p = build_shape(shape, calls)
    for node in spine(p):
        type(node)
    names(p)
    foralls(p)
    depth(p)
    assert calls == []


@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=2**32))
def test_annotations_see_exactly_the_prefix(n, seed):
    seen = []

    def gen_for(k):
        def g(env):
            seen.append((k, list(env)))
            return ints()

        return g

    node = check(lambda e: True)
    for k in reversed(range(n)):
        node = forall(f"x{k}", node, gen=gen_for(k))
    gen_and_run(node, RandomSource(seed), 4)
    assert seen == [(k, [f"x{i}" for i in range(k)]) for k in range(n)]


def test_normal_env_binds_every_name():
    p = forall("a", forall("b", check(lambda e: e["a"] + e["b"] == 3), gen=const(2, "int")), gen=const(1, "int"))
    res = gen_and_run(p, RandomSource(0), 0)
    assert isinstance(res, Normal) and res.truth
    assert list(res.env) == names(p)


def test_discard_keeps_partial_env():
    p = forall("a", implies(lambda e: False, forall("b", check(lambda e: True), gen=const(2, "int"))), gen=const(1, "int"))
    res = gen_and_run(p, RandomSource(0), 0)
    assert isinstance(res, Discard)
    assert dict(res.env) == {"a": 1}


def test_node_kinds_are_distinct():
    c = check(lambda e: True)
    assert isinstance(implies(lambda e: True, c), Implies)
    assert isinstance(c, Check)
