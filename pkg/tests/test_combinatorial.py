from hypothesis import given, settings, strategies as st

from proptree import Env, Value, check, forall, implies
from proptree.rand import Gen, RandomSource, nats
from proptree.runners import constructor_pairs, featurize, combinatorial_loop, run_loop
from proptree.runners.combinatorial import argmax_first, candidate_sources
from proptree.workloads import bst

LEAF = "Leaf"


def view(t):
    return (LEAF, []) if t == LEAF else ("Node", [t[1], t[2]])


def node(l, r):
    return ("Node", l, r)


def _gen_shape(rs, size):
    if size == 0 or rs.next(3) == 0:
        return LEAF
    return node(_gen_shape(rs, size - 1), _gen_shape(rs, size - 1))


SHAPE = Gen("shape", _gen_shape)
EXTRACTORS = {"shape": lambda t: constructor_pairs(t, view)}


def test_featurize_node_of_leaves():
    env = Env([("t", Value("shape", node(LEAF, LEAF)))])
    assert featurize(env, EXTRACTORS) == {("Node", "Leaf", 0), ("Node", "Leaf", 1)}


def test_featurize_leaf_and_untyped():
    env = Env([("t", Value("shape", LEAF)), ("n", Value("int", 5))])
    assert featurize(env, EXTRACTORS) == set()
    assert featurize(env, {}) == set()


def test_featurize_nested():
    t = node(node(LEAF, LEAF), LEAF)
    assert constructor_pairs(t, view) == {("Node", "Node", 0), ("Node", "Leaf", 0), ("Node", "Leaf", 1)}


def test_bst_features():
    t = bst.ops().insert(1, 0, bst.ops().insert(0, 0, None))
    # T(E, T(E, E)): the root's left leaf, its right subtree, and that subtree's two leaves
    assert bst.tree_features(t) == {("T", "E", 0), ("T", "T", 1), ("T", "E", 1)}


def test_argmax_first_tie():
    assert argmax_first([0, 3, 1, 3, 2]) == 1
    assert argmax_first([-1, -1]) == 0


def test_candidate_zero_is_trial():
    trial = RandomSource(9)
    assert candidate_sources(trial, 1) == [trial]
    srcs = candidate_sources(trial, 5)
    assert len(srcs) == 5 and srcs[0] is trial
    assert len({s.bits() for s in srcs[1:]}) == 4


def props():
    return [
        forall("t", check(lambda e: e["t"] == LEAF or e["t"][1] == LEAF), gen=SHAPE),
        forall("n", implies(lambda e: e["n"] % 2 == 0, check(lambda e: e["n"] < 12)), gen=nats()),
        forall("n", forall("t", check(lambda e: True), gen=SHAPE), gen=nats()),
    ]


def test_k1_matches_run_loop():
    for p in props():
        for seed in range(30):
            a = combinatorial_loop(300, p, RandomSource(seed), k=1, extractors=EXTRACTORS)
            b = run_loop(300, p, RandomSource(seed))
            assert (a.foundbug, a.passed, a.discards, a.counterexample) == (b.foundbug, b.passed, b.discards, b.counterexample)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=0, max_value=80), st.integers(min_value=1, max_value=6))
def test_accounting(seed, fuel, k):
    stats = {}
    p = props()[1]
    r = combinatorial_loop(fuel, p, RandomSource(seed), k=k, stats=stats)
    assert stats["executions"] == r.passed + r.discards <= fuel
    assert stats["generated"] <= k * fuel


def test_universe_grows_monotonically():
    snapshots = []
    universe = set()

    def watch(e):
        snapshots.append(frozenset(universe))
        return True

    p = forall("t", check(watch), gen=SHAPE)
    combinatorial_loop(100, p, RandomSource(3), k=5, extractors=EXTRACTORS, universe=universe)
    assert all(a <= b for a, b in zip(snapshots, snapshots[1:]))
    assert snapshots[-1] <= universe and universe


def test_thinning_covers_faster():
    def coverage(k, seed):
        universe = set()
        combinatorial_loop(10, forall("t", check(lambda e: True), gen=SHAPE), RandomSource(seed), k=k, extractors=EXTRACTORS, universe=universe)
        return len(universe)

    assert sum(coverage(5, s) for s in range(20)) >= sum(coverage(1, s) for s in range(20))


def test_rejected_candidates_score_below_everything():
    # Candidates whose precondition already failed are only picked when nothing else is left.
    ran = []
    p = forall("n", implies(lambda e: e["n"] % 2 == 0, check(lambda e: ran.append(e["n"]) or True)), gen=nats())
    r = combinatorial_loop(50, p, RandomSource(1), k=6)
    assert r.passed == len(ran) and r.discards <= 2
    assert run_loop(50, p, RandomSource(1)).discards > 10
