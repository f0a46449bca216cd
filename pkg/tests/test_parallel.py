import random
import time

import pytest
from hypothesis import given, settings, strategies as st

from proptree import check, forall, implies
from proptree.rand import default_size, nats, shrink_int
from proptree.runners import CampaignError, falsifies, parallel_run_loop, run_loop
from proptree.runners.parallel import SharedCampaignState, combine, worker_sources, worker_steps

from test_basic import FALSE


def run_scheduled(p, tests, workers, seed, sched_seed):
    """Interleave worker generators one step at a time in a random, reproducible order."""
    state = SharedCampaignState()
    gens = {i: worker_steps(p, state, tests, rs) for i, rs in enumerate(worker_sources(seed, workers))}
    results = {}
    rng = random.Random(sched_seed)
    while gens:
        i = rng.choice(sorted(gens))
        try:
            next(gens[i])
        except StopIteration as stop:
            results[i] = stop.value
            del gens[i]
    return [results[i] for i in range(workers)], state


def sequential_size(passed, discards):
    return default_size(passed + discards, 0)


def bounded(limit):
    return forall("x", implies(lambda e: e["x"] % 5 != 0, check(lambda e: e["x"] < limit)), gen=nats(), shrink=shrink_int)


def test_zero_tests():
    r = parallel_run_loop(0, FALSE, workers=3)
    assert (r.foundbug, r.passed, r.discards) == (False, 0, 0)


def test_bad_worker_count():
    with pytest.raises(ValueError):
        parallel_run_loop(10, FALSE, workers=-1)


@pytest.mark.parametrize("limit", [8, 30, 10**6])
def test_single_worker_matches_run_loop(limit):
    p = bounded(limit)
    for seed in range(30):
        par = parallel_run_loop(200, p, workers=1, seed=seed)
        seq = run_loop(200, p, worker_sources(seed, 1)[0], size_policy=sequential_size)
        assert (par.foundbug, par.passed, par.discards, par.counterexample) == (seq.foundbug, seq.passed, seq.discards, seq.counterexample)


@pytest.mark.parametrize("sched_seed", range(20))
def test_always_false_with_four_workers(sched_seed):
    results, state = run_scheduled(FALSE, 50, 4, 0, sched_seed)
    r = combine(FALSE, results, time.perf_counter())
    assert r.foundbug and r.passed >= 1
    assert sum(w.fetched for w in results) <= 50 + 4
    assert state.fetch_add() <= 50 + 4


@settings(max_examples=50, deadline=None)
@given(
    st.integers(min_value=0, max_value=2**32),
    st.integers(min_value=0, max_value=120),
    st.sampled_from([1, 2, 4]),
    st.integers(min_value=1, max_value=60),
    st.integers(min_value=0, max_value=1000),
)
def test_scheduled_accounting_and_soundness(seed, tests, workers, limit, sched_seed):
    p = bounded(limit)
    results, _ = run_scheduled(p, tests, workers, seed, sched_seed)
    assert sum(w.passed + w.discards for w in results) <= tests + workers
    for w in results:
        if w.foundbug:
            assert falsifies(p, w.env)


def test_found_flag_stops_other_workers():
    results, state = run_scheduled(FALSE, 10**6, 4, 0, 1)
    assert state.found
    assert sum(w.fetched for w in results) <= 4 + 4


def test_threaded_counterexample_reverifies():
    p = bounded(20)
    for seed in range(10):
        r = parallel_run_loop(500, p, workers=4, seed=seed, shrink_rounds=0)
        assert r.passed + r.discards <= 500 + 4
        if r.foundbug:
            x = int(r.counterexample.split(" = ")[1])
            assert x >= 20 and x % 5 != 0


def test_parallel_finds_what_sequential_finds():
    p = bounded(25)
    for seed in range(10):
        if run_loop(300, p, worker_sources(seed, 1)[0]).foundbug:
            for w in (2, 4):
                assert parallel_run_loop(300 * w, p, workers=w, seed=seed).foundbug


def test_worker_crash_is_campaign_error():
    p = forall("x", check(lambda e: 1 // (e["x"] - 3) is not None), gen=nats())
    with pytest.raises(CampaignError) as info:
        parallel_run_loop(10_000, p, workers=2, seed=0)
    assert isinstance(info.value.__cause__, ZeroDivisionError)
    assert info.value.report is not None
