"""Parallel generate-and-test with a shared trial counter and a stop flag.

Workers pull trial numbers from one shared counter until the budget is spent
or some worker has raised the flag after finding a counterexample.  The
winning counterexample is shrunk after all workers have joined.

The counter is an ``itertools.count``: ``next()`` on it is a single C call
and therefore atomic under CPython's GIL, which is what makes the fetch-add
lock-free here.  The flag is a ``threading.Event``.
"""

from __future__ import annotations

import itertools
import os
import threading
import time
from dataclasses import dataclass
from typing import Generator, Optional

from ..core import Env, Normal, PropTree, RunnerReport
from ..rand import RandomSource, default_size
from .basic import Metric, SizePolicy, compile_plan, gen_and_run, report_failure
from .errors import CampaignError


class SharedCampaignState:
    def __init__(self):
        self._counter = itertools.count()
        self._found = threading.Event()

    def fetch_add(self) -> int:
        return next(self._counter)

    @property
    def found(self) -> bool:
        return self._found.is_set()

    def raise_flag(self) -> None:
        self._found.set()


@dataclass
class WorkerResult:
    foundbug: bool
    passed: int
    discards: int
    env: Optional[Env] = None
    fetched: int = 0
    found_at: Optional[float] = None


def worker_steps(
    p: PropTree,
    state: SharedCampaignState,
    tests: int,
    rs: RandomSource,
    size_policy: SizePolicy = default_size,
    deadline: Optional[float] = None,
) -> Generator[None, None, WorkerResult]:
    """One worker's loop, yielding before each fetch so a scheduler can interleave workers."""
    plan = compile_plan(p)
    passed = discards = fetched = 0
    while True:
        yield
        n = state.fetch_add()
        fetched += 1
        if n >= tests or state.found:
            return WorkerResult(False, passed, discards, fetched=fetched)
        if deadline is not None and time.perf_counter() >= deadline:
            return WorkerResult(False, passed, discards, fetched=fetched)
        rs, trial = rs.split()
        res = gen_and_run(p, trial, size_policy(n, 0), plan=plan)
        if type(res) is Normal:
            if not res.truth:
                state.raise_flag()
                return WorkerResult(True, passed + 1, discards, res.env, fetched, time.perf_counter())
            passed += 1
        else:
            discards += 1


def drive(steps: Generator[None, None, WorkerResult]) -> WorkerResult:
    """Run a worker generator to completion."""
    try:
        while True:
            next(steps)
    except StopIteration as stop:
        return stop.value


def worker_sources(seed: int, workers: int) -> list[RandomSource]:
    return RandomSource(seed).split_n(workers)


def combine(p: PropTree, results: list[WorkerResult], start: float, shrink_rounds=10, metric=None) -> RunnerReport:
    """Sum the workers' counts; the first worker (by index) that found a bug supplies the counterexample."""
    passed = sum(r.passed for r in results)
    discards = sum(r.discards for r in results)
    winner = next((r for r in results if r.foundbug), None)
    if winner is None:
        return RunnerReport(False, passed, discards, wallclock=time.perf_counter() - start)
    report = report_failure(p, winner.env, passed, discards, time.perf_counter(), shrink_rounds, metric)
    report.time_to_failure = winner.found_at - start
    report.wallclock = time.perf_counter() - start
    return report


def parallel_run_loop(
    tests: int,
    p: PropTree,
    workers: Optional[int] = None,
    seed: int = 0,
    size_policy: SizePolicy = default_size,
    *,
    shrink_rounds: int = 10,
    metric: Optional[Metric] = None,
    deadline: Optional[float] = None,
) -> RunnerReport:
    """Run up to ``tests`` trials spread over ``workers`` threads.

    Worker ``i`` draws from ``RandomSource(seed).split_n(workers)[i]`` and
    sizes each trial from the global trial number it fetched.
    """
    workers = workers or os.cpu_count() or 1
    if workers < 1:
        raise ValueError("need at least one worker")
    start = time.perf_counter()
    state = SharedCampaignState()
    sources = worker_sources(seed, workers)
    results: list[Optional[WorkerResult]] = [None] * workers
    errors: list[tuple[int, BaseException]] = []

    def body(i: int):
        try:
            results[i] = drive(worker_steps(p, state, tests, sources[i], size_policy, deadline))
        except BaseException as exc:
            errors.append((i, exc))
            state.raise_flag()

    threads = [threading.Thread(target=body, args=(i,), name=f"proptree-worker-{i}") for i in range(workers)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    finished = [r for r in results if r is not None]
    if errors:
        i, exc = errors[0]
        partial = RunnerReport(
            False,
            sum(r.passed for r in finished),
            sum(r.discards for r in finished),
            wallclock=time.perf_counter() - start,
        )
        raise CampaignError(f"worker {i} crashed: {exc!r}", partial) from exc
    return combine(p, finished, start, shrink_rounds, metric)
