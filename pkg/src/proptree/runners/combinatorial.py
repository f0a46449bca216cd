"""Online generator thinning by constructor-interaction coverage.

Each iteration draws ``k`` candidate inputs, scores them by how many
(parent, child, position) constructor pairs they would add to the campaign's
coverage universe, and executes only the best one.
"""

from __future__ import annotations

import time
from typing import Any, Callable, Hashable, Iterable, Mapping, Optional

from ..core import Env, Normal, PropTree, RunnerReport
from ..rand import RandomSource, default_size
from .basic import Metric, SizePolicy, compile_plan, generate_prefix, no_failure, report_failure, run_on

Feature = Hashable
Extractor = Callable[[Any], Iterable[Feature]]


def constructor_pairs(root: Any, view: Callable[[Any], tuple[str, list]]) -> set[tuple[str, str, int]]:
    """All (parent, child, position) constructor triples in a term.

    ``view(node)`` returns the node's constructor name and its children that
    are themselves terms.
    """
    out = set()
    stack = [root]
    while stack:
        node = stack.pop()
        name, kids = view(node)
        for i, kid in enumerate(kids):
            out.add((name, view(kid)[0], i))
            stack.append(kid)
    return out


def featurize(env: Env, extractors: Mapping[str, Extractor]) -> set:
    feats = set()
    for name in env:
        fn = extractors.get(env.tags[name])
        if fn is not None:
            feats.update(fn(env[name]))
    return feats


def argmax_first(scores: list[int]) -> int:
    best = 0
    for i, s in enumerate(scores):
        if s > scores[best]:
            best = i
    return best


def candidate_sources(trial: RandomSource, k: int) -> list[RandomSource]:
    """Candidate 0 uses ``trial`` itself, so ``k == 1`` replays the plain runner."""
    sources = [trial]
    if k > 1:
        sources.extend(trial.split()[1].split_n(k - 1))
    return sources


def combinatorial_loop(
    fuel: int,
    p: PropTree,
    rs: RandomSource,
    k: int = 5,
    extractors: Optional[Mapping[str, Extractor]] = None,
    size_policy: SizePolicy = default_size,
    *,
    universe: Optional[set] = None,
    shrink_rounds: int = 10,
    metric: Optional[Metric] = None,
    deadline: Optional[float] = None,
    stats: Optional[dict] = None,
) -> RunnerReport:
    """Generate ``k`` candidates per iteration and run the most novel one.

    ``fuel`` counts property executions.  Candidates rejected by a
    precondition while being generated score -1; ties go to the first drawn.
    Only the executed candidate's features join ``universe``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    extractors = extractors or {}
    universe = set() if universe is None else universe
    plan = compile_plan(p)
    generated = 0
    start = time.perf_counter()
    passed = discards = 0
    for _ in range(fuel):
        if deadline is not None and time.perf_counter() >= deadline:
            break
        rs, trial = rs.split()
        size = size_policy(passed, discards)
        cands = []
        scores = []
        for src in candidate_sources(trial, k):
            env, rejected = generate_prefix(p, src, size, plan)
            generated += 1
            feats = featurize(env, extractors)
            cands.append((env, feats))
            scores.append(-1 if rejected else len(feats - universe))
        env, feats = cands[argmax_first(scores)]
        universe |= feats
        res = run_on(p, env)
        if type(res) is Normal:
            if not res.truth:
                if stats is not None:
                    stats.update(generated=generated, executions=passed + discards + 1)
                return report_failure(p, res.env, passed + 1, discards, start, shrink_rounds, metric)
            passed += 1
        else:
            discards += 1
    if stats is not None:
        stats.update(generated=generated, executions=passed + discards)
    return no_failure(passed, discards, start)
