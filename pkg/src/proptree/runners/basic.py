"""Building-block interpreters and the classic generate-then-shrink runner."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from ..core import (
    Check,
    ContractViolation,
    Discard,
    Env,
    Forall,
    Implies,
    NoGenerator,
    Normal,
    PropTree,
    RunnerReport,
    RunResult,
    Value,
    foralls,
)
from ..rand import RandomSource, default_size
from .errors import ShrinkError

SizePolicy = Callable[[int, int], int]
Metric = Callable[[Env], Any]

SCALAR_TAGS = frozenset({"int", "bool", "str", "float"})


def compile_plan(p: PropTree) -> tuple:
    """Flatten ``p``'s spine once so per-trial interpretation avoids dispatch on node types.

    A quantifier becomes ``(name, generator, contract, static_gen)``, where
    ``static_gen`` is set when the generator ignores the environment; a
    precondition becomes ``(None, pre, None, None)``.  The plan is
    ``(steps, check_predicate)``.
    """
    steps = []
    node = p
    while type(node) is not Check:
        if type(node) is Forall:
            ann = node.annotations
            steps.append((node.name, ann.generator, ann.contract, getattr(ann.generator, "static", None)))
        else:
            steps.append((None, node.pre, None, None))
        node = node.body
    return tuple(steps), node.pred


_new_dict = dict.__new__


def run_plan(plan: tuple, rs: RandomSource, size: int, probe=None, stop_before_check: bool = False):
    """Interpret a compiled plan once: returns ``(env, verdict)``.

    ``verdict`` is the predicate's truth, or ``None`` when a precondition
    discarded the input.  With ``stop_before_check`` the predicate is not
    run and a complete input reports ``True``.
    """
    steps, pred = plan
    env = _new_dict(Env)
    env.tags = tags = {}
    for name, fn, contract, g in steps:
        if name is None:
            ok = fn(env)
            if probe is not None:
                probe.on_predicate("implies", ok)
            if not ok:
                return env, None
            continue
        if g is None:
            if fn is None:
                raise NoGenerator(name)
            g = fn(env)
        v = g.run(rs, size)
        if contract is not None and not contract(env, v):
            raise ContractViolation(name, v)
        env[name] = v
        tags[name] = g.tag
    if stop_before_check:
        return env, True
    truth = True if pred(env) else False
    if probe is not None:
        probe.on_predicate("check", truth)
    return env, truth


def as_result(env: Env, verdict: Optional[bool]) -> RunResult:
    return Discard(env) if verdict is None else Normal(env, verdict)


def gen_and_run(p: PropTree, rs: RandomSource, size: int, probe=None, plan: Optional[tuple] = None) -> RunResult:
    """Generate values quantifier by quantifier and run the property once.

    A failing precondition stops generation and yields ``Discard`` with the
    values generated so far.  Callers running many trials pass a ``plan``
    from :func:`compile_plan`.
    """
    return as_result(*run_plan(plan or compile_plan(p), rs, size, probe))


def generate_prefix(p: PropTree, rs: RandomSource, size: int, plan: Optional[tuple] = None) -> tuple[Env, bool]:
    """Generate like :func:`gen_and_run` but stop short of the ``Check``.

    Returns the environment and whether a precondition rejected it.
    """
    env, verdict = run_plan(plan or compile_plan(p), rs, size, stop_before_check=True)
    return env, verdict is None


def run_on(p: PropTree, env: Env, probe=None) -> RunResult:
    """Re-run ``p`` on fixed values taken from ``env``.

    The environment handed to each predicate is rebuilt from scratch so it
    binds only the enclosing quantifiers.  Contracts are re-checked.
    """
    cur = Env()
    node = p
    while True:
        kind = type(node)
        if kind is Forall:
            name = node.name
            v = env[name]
            contract = node.annotations.contract
            if contract is not None and not contract(cur, v):
                raise ContractViolation(name, v)
            cur._extend(name, env.tags[name], v)
            node = node.body
        elif kind is Implies:
            ok = node.pre(cur)
            if probe is not None:
                probe.on_predicate("implies", ok)
            if not ok:
                return Discard(cur)
            node = node.body
        else:
            truth = bool(node.pred(cur))
            if probe is not None:
                probe.on_predicate("check", truth)
            return Normal(cur, truth)


def falsifies(p: PropTree, env: Env) -> bool:
    """True when ``env`` is a counterexample; contract breakers never are."""
    try:
        res = run_on(p, env)
    except ContractViolation:
        return False
    return type(res) is Normal and not res.truth


# -- printing ----------------------------------------------------------------


def show_value(node: Forall, prefix: Env, tag: str, payload: Any) -> str:
    printer = node.annotations.printer
    if printer is not None:
        return printer(prefix, payload)
    if tag in SCALAR_TAGS:
        return repr(payload)
    return f"<{tag}> {payload!r}"


def print_env(p: PropTree, env: Env) -> str:
    """One ``name = value`` line per binding, outermost first."""
    lines = []
    prefix = Env()
    for node in foralls(p):
        if node.name not in env:
            break
        tag, v = env.tags[node.name], env[node.name]
        lines.append(f"{node.name} = {show_value(node, prefix, tag, v)}")
        prefix._extend(node.name, tag, v)
    return "\n".join(lines)


def printed_size(p: PropTree) -> Metric:
    """Default shrink ordering: length of the printed env, then the text itself."""

    def metric(env: Env):
        text = print_env(p, env)
        return (len(text), text)

    return metric


# -- shrinking ---------------------------------------------------------------


@dataclass
class ShrinkOutcome:
    env: Env
    steps: list[Env] = field(default_factory=list)
    exhausted: bool = False
    examined: list[Env] = field(default_factory=list)


def shrink_candidates(p: PropTree, env: Env, metric: Metric, skip=frozenset()) -> list[tuple[Any, str, Env]]:
    """All single-variable shrinks of ``env`` that are strictly smaller under ``metric``.

    Sorted smallest first; ties keep quantifier order, then shrinker order.
    """
    current = metric(env)
    out = []
    seq = 0
    for i, node in enumerate(foralls(p)):
        shrinker = node.annotations.shrinker
        if shrinker is None or node.name in skip:
            continue
        prefix = env.prefix(i)
        tag = env.tags[node.name]
        for c in shrinker(prefix, env[node.name]):
            cand = env.replace(node.name, Value(tag, c))
            m = metric(cand)
            if m < current:
                out.append((m, seq, node.name, cand))
                seq += 1
    out.sort(key=lambda t: (t[0], t[1]))
    return [(m, name, cand) for m, _, name, cand in out]


def shrink(p: PropTree, env0: Env, rounds: int = 10, metric: Optional[Metric] = None) -> ShrinkOutcome:
    """Best-first external shrinking.

    Each step computes every single-variable candidate, tries them smallest
    first and moves to the first one that still falsifies ``p``.  A variable
    stops being shrunk after ``rounds`` accepted steps; ``exhausted`` reports
    whether that cap ended the search.
    """
    if not falsifies(p, env0):
        raise ShrinkError("shrinking needs a falsifying environment")
    metric = metric or printed_size(p)
    accepted = dict.fromkeys((n.name for n in foralls(p)), 0)
    capped = {name for name, k in accepted.items() if k >= rounds}
    out = ShrinkOutcome(env0)
    env = env0
    while True:
        found = changed = None
        examined = []
        for _, name, cand in shrink_candidates(p, env, metric, skip=capped):
            examined.append(cand)
            if falsifies(p, cand):
                found, changed = cand, name
                break
        if found is None:
            out.examined = examined
            out.exhausted = bool(capped)
            break
        env = found
        out.steps.append(env)
        accepted[changed] += 1
        if accepted[changed] >= rounds:
            capped.add(changed)
    out.env = env
    return out


def shrink_loop(rounds: int, p: PropTree, env0: Env, metric: Optional[Metric] = None) -> Env:
    return shrink(p, env0, rounds, metric).env


# -- the generational runner ---------------------------------------------------


def report_failure(
    p: PropTree,
    env: Env,
    passed: int,
    discards: int,
    start: float,
    shrink_rounds: int = 10,
    metric: Optional[Metric] = None,
) -> RunnerReport:
    """Shrink and print a counterexample; ``passed`` already counts the failing trial."""
    found_at = time.perf_counter()
    shrunk = shrink_loop(shrink_rounds, p, env, metric)
    printed = print_env(p, shrunk)
    end = time.perf_counter()
    return RunnerReport(
        foundbug=True,
        passed=passed,
        discards=discards,
        counterexample=printed,
        wallclock=end - start,
        time_to_failure=found_at - start,
        shrink_time=end - found_at,
        env=shrunk,
        original=env,
    )


def no_failure(passed: int, discards: int, start: float) -> RunnerReport:
    return RunnerReport(False, passed, discards, wallclock=time.perf_counter() - start)


def run_loop(
    fuel: int,
    p: PropTree,
    rs: RandomSource,
    size_policy: SizePolicy = default_size,
    *,
    shrink_rounds: int = 10,
    metric: Optional[Metric] = None,
    deadline: Optional[float] = None,
    max_discards: Optional[int] = None,
) -> RunnerReport:
    """Generate and test until a counterexample is found or ``fuel`` runs out.

    Discards consume fuel.  Each trial draws from its own split of ``rs``.
    ``deadline`` is an absolute ``time.perf_counter()`` value.
    """
    start = time.perf_counter()
    plan = compile_plan(p)
    limited = deadline is not None or max_discards is not None
    passed = discards = 0
    for _ in range(fuel):
        if limited:
            if deadline is not None and time.perf_counter() >= deadline:
                break
            if max_discards is not None and discards >= max_discards:
                break
        rs, trial = rs.split()
        env, verdict = run_plan(plan, trial, size_policy(passed, discards))
        if verdict:
            passed += 1
        elif verdict is None:
            discards += 1
        else:
            return report_failure(p, env, passed + 1, discards, start, shrink_rounds, metric)
    return no_failure(passed, discards, start)
