import statistics

import pytest
from hypothesis import given, settings, strategies as st

from proptree import Env, Value, check, forall, implies
from proptree.core import Discard, Normal
from proptree.rand import Gen, RandomSource, const, int_point_mutation, nats
from proptree.runners import (
    GENERATE,
    BeatsBest,
    ConstantProbe,
    CoverageProbe,
    EnvProbe,
    NeverUseful,
    PredicateCountProbe,
    Threshold,
    fuzz_loop,
    instrumented_run,
    make_pool,
    mutate_env,
    run_loop,
    target_loop,
    trace,
)
from proptree.runners.errors import ConfigurationError
from proptree.workloads import bst, lists

from pool_models import Model


def plus_one(env, x):
    return const(x + 1, "int")


def verdict(r):
    return (r.foundbug, r.passed, r.discards, r.counterexample)


class AlwaysGenerate:
    """A pool that never holds anything."""

    def sample(self):
        return GENERATE

    def invest(self, env, feedback, utility):
        raise AssertionError("invested into the generate-only pool")

    def revise(self):
        pass

    def best(self):
        return None


def test_constant_zero_feedback_never_invests():
    p = forall("x", check(lambda e: True), gen=nats(), mutate=int_point_mutation)
    pool = make_pool("fifo", 10)
    samples = []
    orig = pool.sample
    pool.sample = lambda: samples.append(orig()) or samples[-1]
    r = fuzz_loop(200, p, RandomSource(0), pool, Threshold(0), ConstantProbe(0))
    assert not r.foundbug and r.passed == 200
    assert len(pool) == 0 and all(d is GENERATE for d in samples)


GEN_ONLY_PROPS = [
    forall("x", check(lambda e: e["x"] < 25), gen=nats(), mutate=int_point_mutation),
    forall("x", implies(lambda e: e["x"] % 3 != 0, check(lambda e: e["x"] < 40)), gen=nats(), mutate=int_point_mutation),
    forall("t", check(lambda e: bst.is_bst(bst.ops("insert-duplicates-left").insert(1, 0, e["t"]))), **bst.annotations("bespoke")["tree"]),
]


@pytest.mark.parametrize("p", GEN_ONLY_PROPS)
def test_generate_only_pool_reproduces_run_loop(p):
    for seed in range(25):
        base = verdict(run_loop(500, p, RandomSource(seed)))
        fz = fuzz_loop(500, p, RandomSource(seed), AlwaysGenerate(), NeverUseful(), PredicateCountProbe())
        tg = target_loop(500, p, RandomSource(seed), lambda e: 0, AlwaysGenerate(), NeverUseful())
        assert verdict(fz) == base and verdict(tg) == base


def test_never_useful_real_pool_reproduces_run_loop():
    p = GEN_ONLY_PROPS[1]
    for seed in range(25):
        base = verdict(run_loop(300, p, RandomSource(seed)))
        r = fuzz_loop(300, p, RandomSource(seed), make_pool("heap", 10), NeverUseful(), ConstantProbe(7))
        assert verdict(r) == base


def reference_chain(variant, energy, scaling, fuel, modulus):
    """Replay the fuzz loop for x := seed + 1 with feedback x, against the pool model."""
    model = Model(variant, energy, scaling)
    xs = []
    for _ in range(fuel):
        s = model.sample()
        x = 0 if s is None else s[0] + 1
        xs.append(x)
        best = model.best()
        useful = best is None or x > best
        if modulus and x % modulus == modulus - 1:
            if s is not None and not useful:
                model.revise()
        elif useful:
            model.invest(x, x, x)
        elif s is not None:
            model.revise()
    return xs, model.sample()


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from(["fifo", "filo", "heap", "static-singleton", "dyn-monotonic", "dyn-resetting"]),
    st.sampled_from([1, 2, 3, 10]),
    st.sampled_from(["full", "linear"]),
    st.integers(min_value=0, max_value=60),
    st.sampled_from([0, 2, 3]),
)
def test_monotone_chain_matches_model(variant, energy, scaling, fuel, modulus):
    seen = []
    body = check(lambda e: seen.append(e["x"]) or True)
    if modulus:
        body = implies(lambda e: seen.append(e["x"]) or e["x"] % modulus != modulus - 1, check(lambda e: True))
    p = forall("x", body, gen=const(0, "int"), mutate=plus_one)
    pool = make_pool(variant, energy, scaling)
    fuzz_loop(fuel, p, RandomSource(1), pool, BeatsBest(), EnvProbe(lambda e: e["x"]))
    xs, final = reference_chain(variant, energy, scaling, fuel, modulus)
    assert seen == xs
    d = pool.sample()
    assert (None if d is GENERATE else (d.source.env["x"], d.source.energy)) == final


def test_useless_discarded_mutation_revises():
    # Every mutation is discarded and its feedback is never better: each one costs energy.
    p = forall("x", implies(lambda e: e["x"] == 0, check(lambda e: True)), gen=const(0, "int"), mutate=plus_one)
    pool = make_pool("fifo", 3)
    r = fuzz_loop(5, p, RandomSource(0), pool, BeatsBest(), ConstantProbe(0))
    # generate+invest, three revising discards, then a fresh generate invests again
    assert (r.passed, r.discards) == (2, 3)
    assert [s.energy for s in pool.seeds()] == [3]


def test_useful_discarded_mutation_leaves_pool_alone():
    p = forall("x", implies(lambda e: e["x"] == 0, check(lambda e: True)), gen=const(0, "int"), mutate=plus_one)
    pool = make_pool("fifo", 3)
    r = fuzz_loop(50, p, RandomSource(0), pool, BeatsBest(), EnvProbe(lambda e: e["x"]))
    assert (r.passed, r.discards) == (1, 49)
    assert [s.energy for s in pool.seeds()] == [3]


def test_target_loop_discards_never_touch_pool():
    p = forall("x", implies(lambda e: e["x"] == 0, check(lambda e: True)), gen=const(0, "int"), mutate=plus_one)
    pool = make_pool("fifo", 3)
    r = target_loop(40, p, RandomSource(0), lambda e: 0, pool, BeatsBest())
    assert (r.passed, r.discards) == (1, 39)
    assert [s.energy for s in pool.seeds()] == [3]


def test_zero_fuel_is_empty_report():
    p = forall("x", check(lambda e: False), gen=nats(), mutate=int_point_mutation)
    for r in (
        fuzz_loop(0, p, RandomSource(0), make_pool("heap"), BeatsBest(), ConstantProbe()),
        target_loop(0, p, RandomSource(0), lambda e: 0, make_pool("heap"), BeatsBest()),
    ):
        assert (r.foundbug, r.passed, r.discards) == (False, 0, 0)


def test_first_trial_failure_is_shrunk():
    p = forall("x", check(lambda e: e["x"] < 0), gen=const(9, "int"), mutate=plus_one, shrink=lambda env, x: [x - 1] if x else [])
    r = fuzz_loop(10, p, RandomSource(0), make_pool("fifo"), BeatsBest(), ConstantProbe())
    assert r.foundbug and r.passed == 1 and r.counterexample == "x = 0"


def test_missing_mutator_rejected():
    p = forall("x", check(lambda e: True), gen=nats())
    with pytest.raises(ConfigurationError):
        fuzz_loop(1, p, RandomSource(0), make_pool("fifo"), BeatsBest(), ConstantProbe())
    with pytest.raises(ConfigurationError):
        target_loop(1, p, RandomSource(0), lambda e: 0, make_pool("fifo"), BeatsBest())


def test_predicate_count_probe():
    p = forall("x", implies(lambda e: True, check(lambda e: True)), gen=nats())
    res, fb = instrumented_run(p, RandomSource(0), PredicateCountProbe())
    assert type(res) is Normal and fb == 2


def test_feedback_reported_for_discards():
    p = forall("x", implies(lambda e: False, check(lambda e: True)), gen=const(4, "int"))
    res, fb = instrumented_run(p, RandomSource(0), EnvProbe(lambda e: e["x"] * 10))
    assert type(res) is Discard and fb == 40


def height(t):
    return 0 if t is None else 1 + max(height(t.left), height(t.right))


def test_tree_height_probe():
    insert = bst.ops().insert
    t = None
    for k in [4, 2, 6, 1, 3, 0]:
        t = insert(k, 0, t)
    p = forall("t", check(lambda e: True), **bst.annotations("bespoke")["tree"])
    _, fb = instrumented_run(p, Env([("t", Value("tree", t))]), EnvProbe(lambda e: height(e["t"])))
    assert fb == 4


def test_coverage_probe_counts_new_labels_only():
    p = forall("x", check(lambda e: trace(e["x"] % 3) or True), gen=nats())
    probe = CoverageProbe()
    fbs = [instrumented_run(p, Env([("x", Value("int", x))]), probe)[1] for x in [0, 3, 1, 4, 2]]
    # first run also sees the predicate outcome label
    assert fbs == [2, 0, 1, 0, 1]


def test_trace_outside_runs_is_noop():
    trace("anything")


def test_mutate_env_changes_one_variable():
    mut = lambda env, v: const(v + 1, "int")
    p = forall("a", forall("b", forall("c", check(lambda e: True), gen=nats(), mutate=mut), gen=nats(), mutate=mut), gen=nats(), mutate=mut)
    env = Env([(n, Value("int", 0)) for n in "abc"])
    hit = set()
    for seed in range(40):
        out = mutate_env(p, env, RandomSource(seed))
        changed = [n for n in env if env[n] != out[n]]
        assert len(changed) == 1
        hit.update(changed)
    assert hit == set("abc")
    assert all(v == 1 for v in mutate_env(p, env, RandomSource(0), whole=True).values())


def test_mutator_sees_mutated_prefix():
    inner = forall("b", check(lambda e: True), gen=nats(), mutate=lambda env, b: const(env["a"], "int"))
    p = forall("a", inner, gen=nats(), mutate=lambda env, a: const(a + 5, "int"))
    out = mutate_env(p, Env([("a", Value("int", 1)), ("b", Value("int", 0))]), RandomSource(0), whole=True)
    assert dict(out) == {"a": 6, "b": 6}


def steps_to_failure(r, budget):
    return r.passed + r.discards if r.foundbug else budget


def test_targeted_beats_generation_on_long_lists():
    budget = 10_000
    p = lists.build("checksum-model", "long-input-drops-last")
    targeted, generated = [], []
    for seed in range(20):
        t = target_loop(budget, p, RandomSource(seed), lists.length_feedback, make_pool("heap", 10), BeatsBest(), shrink_rounds=0)
        g = run_loop(budget, p, RandomSource(seed), shrink_rounds=0)
        targeted.append(steps_to_failure(t, budget))
        generated.append(steps_to_failure(g, budget))
    assert statistics.median(generated) >= 2 * statistics.median(targeted)


def test_generator_cap_hides_long_list_bug():
    g = Gen("list", lists._gen_list)
    assert max(len(g.run(RandomSource(s), 1000)) for s in range(200)) <= lists.GEN_CAP < lists.THRESHOLD
