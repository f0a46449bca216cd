"""Feedback-guided runners: coverage-style fuzzing and targeted search.

Instrumentation is probe based.  Code under test marks interesting points
with :func:`trace`; while :func:`instrumented_run` executes a property the
active probe sees those marks, every precondition/predicate outcome, and the
final result, and condenses them into one integer of feedback.
"""

from __future__ import annotations

import contextvars
import time
from typing import Callable, Optional, Union

from ..core import Env, Normal, PropTree, RunnerReport, RunResult, Value, foralls
from ..rand import RandomSource, default_size
from .basic import Metric, SizePolicy, compile_plan, gen_and_run, no_failure, report_failure, run_on
from .errors import ConfigurationError
from .pools import GENERATE, SeedPool, Utility

_active_probe: contextvars.ContextVar = contextvars.ContextVar("proptree_probe", default=None)


def trace(label) -> None:
    """Record that execution reached ``label``; a no-op outside instrumented runs."""
    probe = _active_probe.get()
    if probe is not None:
        probe.hit(label)


class Probe:
    def start(self) -> None:
        pass

    def hit(self, label) -> None:
        pass

    def on_predicate(self, kind: str, outcome: bool) -> None:
        pass

    def finish(self, result: RunResult) -> None:
        pass

    def feedback(self) -> int:
        return 0


class ConstantProbe(Probe):
    def __init__(self, value: int = 0):
        self.value = value

    def feedback(self):
        return self.value


class PredicateCountProbe(Probe):
    def start(self):
        self.count = 0

    def on_predicate(self, kind, outcome):
        self.count += 1

    def feedback(self):
        return self.count


class CoverageProbe(Probe):
    """Feedback = how many traced labels this run reached for the first time in the campaign."""

    def __init__(self):
        self.seen: set = set()
        self._run: set = set()

    def start(self):
        self._run = set()

    def hit(self, label):
        self._run.add(label)

    def on_predicate(self, kind, outcome):
        self._run.add((kind, outcome))

    def feedback(self):
        new = self._run - self.seen
        self.seen |= new
        return len(new)


class EnvProbe(Probe):
    """Feedback computed from the values of the finished run, e.g. a tree height."""

    def __init__(self, fn: Callable[[Env], int]):
        self.fn = fn
        self._value = 0

    def start(self):
        self._value = 0

    def finish(self, result):
        self._value = self.fn(result.env)

    def feedback(self):
        return self._value


def instrumented_run(
    p: PropTree, source: Union[RandomSource, Env], probe: Probe, size: int = 0, plan: Optional[tuple] = None
) -> tuple[RunResult, int]:
    """Run ``p`` once under ``probe``.

    ``source`` is either a random source (values are generated) or a fixed
    environment (values are replayed).  Feedback is returned for discarded
    runs too.
    """
    token = _active_probe.set(probe)
    probe.start()
    try:
        if isinstance(source, RandomSource):
            res = gen_and_run(p, source, size, probe, plan)
        else:
            res = run_on(p, source, probe)
    finally:
        _active_probe.reset(token)
    probe.finish(res)
    return res, probe.feedback()


def require_mutators(p: PropTree) -> None:
    missing = [node.name for node in foralls(p) if node.annotations.mutator is None]
    if missing:
        raise ConfigurationError(f"no mutator for {', '.join(missing)}")


def mutate_env(p: PropTree, env: Env, rs: RandomSource, size: int = 0, whole: bool = False) -> Env:
    """Mutate one uniformly chosen variable of ``env`` (or all of them if ``whole``).

    Each mutator sees the already-mutated outer values.
    """
    nodes = foralls(p)
    if not nodes:
        return env
    targets = range(len(nodes)) if whole else (rs.next(len(nodes)),)
    out = env
    for i in targets:
        node = nodes[i]
        mutator = node.annotations.mutator
        if mutator is None:
            raise ConfigurationError(f"no mutator for {node.name}")
        g = mutator(out.prefix(i), out[node.name])
        out = out.replace(node.name, Value(g.tag, g.run(rs, size)))
    return out


def fuzz_loop(
    fuel: int,
    p: PropTree,
    rs: RandomSource,
    pool: SeedPool,
    utility: Utility,
    probe: Probe,
    size_policy: SizePolicy = default_size,
    *,
    whole_env_mutation: bool = False,
    shrink_rounds: int = 10,
    metric: Optional[Metric] = None,
    deadline: Optional[float] = None,
) -> RunnerReport:
    """Coverage-guided fuzzing over a seed pool.

    Useful passing inputs are invested; a useless mutated input, passing or
    discarded, revises the pool.  A discarded mutation whose feedback was
    useful leaves the pool untouched.
    """
    require_mutators(p)
    plan = compile_plan(p)
    start = time.perf_counter()
    passed = discards = 0
    for _ in range(fuel):
        if deadline is not None and time.perf_counter() >= deadline:
            break
        rs, trial = rs.split()
        directive = pool.sample()
        size = size_policy(passed, discards)
        if directive is GENERATE:
            res, fb = instrumented_run(p, trial, probe, size, plan)
        else:
            source = mutate_env(p, directive.source.env, trial, size, whole_env_mutation)
            res, fb = instrumented_run(p, source, probe, size)
        if type(res) is Normal:
            if not res.truth:
                return report_failure(p, res.env, passed + 1, discards, start, shrink_rounds, metric)
            passed += 1
            if utility.useful(pool, fb):
                pool.invest(res.env, fb, utility.utility(pool, fb))
            elif directive is not GENERATE:
                pool.revise()
        else:
            discards += 1
            if directive is not GENERATE and not utility.useful(pool, fb):
                pool.revise()
    return no_failure(passed, discards, start)


def target_loop(
    fuel: int,
    p: PropTree,
    rs: RandomSource,
    feedback_fn: Callable[[Env], int],
    pool: SeedPool,
    utility: Utility,
    size_policy: SizePolicy = default_size,
    *,
    whole_env_mutation: bool = False,
    shrink_rounds: int = 10,
    metric: Optional[Metric] = None,
    deadline: Optional[float] = None,
) -> RunnerReport:
    """Targeted search: feedback comes from ``feedback_fn`` on each passing input.

    Discarded inputs never touch the pool.
    """
    require_mutators(p)
    plan = compile_plan(p)
    start = time.perf_counter()
    passed = discards = 0
    for _ in range(fuel):
        if deadline is not None and time.perf_counter() >= deadline:
            break
        rs, trial = rs.split()
        directive = pool.sample()
        size = size_policy(passed, discards)
        if directive is GENERATE:
            res = gen_and_run(p, trial, size, plan=plan)
        else:
            res = run_on(p, mutate_env(p, directive.source.env, trial, size, whole_env_mutation))
        if type(res) is Normal:
            if not res.truth:
                return report_failure(p, res.env, passed + 1, discards, start, shrink_rounds, metric)
            passed += 1
            fb = feedback_fn(res.env)
            if utility.useful(pool, fb):
                pool.invest(res.env, fb, utility.utility(pool, fb))
            elif directive is not GENERATE:
                pool.revise()
        else:
            discards += 1
    return no_failure(passed, discards, start)

