"""Campaign harness: run tasks under a runner configuration and summarise the results.

Each trial becomes one JSON object (a JSON-lines record).  Bucket charts
and shrink-quality statistics are computed from those records, so they can
be recomputed from a saved results file.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import IO, Iterable, Optional

from .rand import RandomSource, default_size
from .runners import (
    CoverageProbe,
    EnvProbe,
    combinatorial_loop,
    falsifies,
    fuzz_loop,
    make_pool,
    make_utility,
    parallel_run_loop,
    print_env,
    run_loop,
    target_loop,
)
from .runners.errors import ConfigurationError
from .runners.pools import POOL_VARIANTS, pool_configurations
from .workloads import Task, get_workload

SCHEMA_VERSION = 1
RUNNERS = ("generate", "fuzz", "target", "parallel", "combinatorial")
BUCKETS = ((0.1, "<=0.1s"), (1.0, "<=1s"), (10.0, "<=10s"), (60.0, "<=60s"))
UNSOLVED = "unsolved"
TIME_FIELDS = ("time_ms", "shrink_ms")


@dataclass
class CampaignConfig:
    workload: str
    mutant: str
    prop: str
    runner: str = "generate"
    strategy: str = "bespoke"
    pool: Optional[str] = None
    energy: Optional[int] = None
    scaling: str = "full"
    utility: str = "beats-best"
    feedback: str = "coverage"
    workers: Optional[int] = None
    candidates: Optional[int] = None
    fuel: int = 100_000
    time_limit: float = 60.0
    seed: int = 0
    trials: int = 1
    shrink_rounds: int = 10
    parallel_trials: int = 1
    size: Optional[int] = None

    @property
    def task(self) -> Task:
        return Task(self.workload, self.mutant, self.prop)

    def validate(self) -> None:
        if self.runner not in RUNNERS:
            raise ConfigurationError(f"unknown runner {self.runner!r}; expected one of {', '.join(RUNNERS)}")
        seeded = self.runner in ("fuzz", "target")
        if not seeded and (self.pool is not None or self.energy is not None):
            raise ConfigurationError("pool and energy apply only to the fuzz and target runners")
        if self.pool is not None and self.pool not in POOL_VARIANTS:
            raise ConfigurationError(f"unknown pool {self.pool!r}; expected one of {', '.join(POOL_VARIANTS)}")
        if self.energy is not None and self.energy < 1:
            raise ConfigurationError("energy must be positive")
        if self.workers is not None and (self.runner != "parallel" or self.workers < 1):
            raise ConfigurationError("workers applies only to the parallel runner and must be positive")
        if self.candidates is not None and (self.runner != "combinatorial" or self.candidates < 1):
            raise ConfigurationError("candidates applies only to the combinatorial runner and must be positive")
        if self.feedback not in ("coverage", "workload"):
            raise ConfigurationError("feedback must be 'coverage' or 'workload'")
        if self.scaling not in ("full", "linear"):
            raise ConfigurationError("scaling must be 'full' or 'linear'")
        if self.fuel < 0 or self.time_limit < 0 or self.shrink_rounds < 0:
            raise ConfigurationError("fuel, time limit and shrink rounds must be non-negative")
        if self.size is not None and self.size < 0:
            raise ConfigurationError("size must be non-negative")
        if self.trials < 1 or self.parallel_trials < 1:
            raise ConfigurationError("trials and parallel trials must be at least 1")
        try:
            make_utility(self.utility)
            w = get_workload(self.workload)
            w.prop(self.prop, self.mutant, self.strategy)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None
        if self.runner == "target" and w.feedback is None:
            raise ConfigurationError(f"workload {self.workload!r} has no target feedback function")

    def runner_label(self) -> str:
        if self.runner in ("fuzz", "target"):
            pool = self.pool or "heap"
            energy = "-" if pool == "static-singleton" else self.energy or 100
            return f"{self.runner}:{pool}:{energy}"
        if self.runner == "parallel":
            return f"parallel:{self.workers or 1}"
        if self.runner == "combinatorial":
            return f"combinatorial:{self.candidates or 5}"
        return self.runner


def size_policy(config: CampaignConfig):
    """The logarithmic default, or a fixed generation size when ``config.size`` is set."""
    if config.size is None:
        return default_size
    return lambda passed, discards: config.size


def run_trial(config: CampaignConfig, index: int) -> dict:
    """Run trial ``index`` (seed ``config.seed + index``) and return its record."""
    w = get_workload(config.workload)
    p = w.prop(config.prop, config.mutant, config.strategy)
    metric = w.metric(p)
    seed = config.seed + index
    rs = RandomSource(seed)
    deadline = time.perf_counter() + config.time_limit
    common = dict(shrink_rounds=config.shrink_rounds, metric=metric, deadline=deadline, size_policy=size_policy(config))
    r = config.runner
    if r == "generate":
        report = run_loop(config.fuel, p, rs, **common)
    elif r in ("fuzz", "target"):
        pool = make_pool(config.pool or "heap", config.energy or 100, config.scaling)
        utility = make_utility(config.utility)
        if r == "target":
            report = target_loop(config.fuel, p, rs, w.feedback, pool, utility, **common)
        else:
            probe = EnvProbe(w.feedback) if config.feedback == "workload" else CoverageProbe()
            report = fuzz_loop(config.fuel, p, rs, pool, utility, probe, **common)
    elif r == "parallel":
        report = parallel_run_loop(config.fuel, p, config.workers or 1, seed, **common)
    else:
        report = combinatorial_loop(
            config.fuel, p, rs, config.candidates or 5, w.extractors, universe=set(), **common
        )
    record = {
        "schema": SCHEMA_VERSION,
        "task": config.task.id,
        "runner": config.runner_label(),
        "seed": seed,
        "foundbug": report.foundbug,
        "passed": report.passed,
        "discards": report.discards,
        "time_ms": round(1000 * (report.time_to_failure if report.foundbug else report.wallclock), 3),
        "shrink_ms": round(1000 * report.shrink_time, 3),
        "counterexample": report.counterexample,
        "original": None,
        "original_size": None,
        "shrunk_size": None,
        "shrink_ok": None,
    }
    if report.foundbug:
        record.update(
            original=print_env(p, report.original),
            original_size=w.env_size(report.original),
            shrunk_size=w.env_size(report.env),
            shrink_ok=falsifies(p, report.env),
        )
    return record


def run_campaign(config: CampaignConfig) -> list[dict]:
    """All trials of a campaign, in trial order."""
    config.validate()
    if config.parallel_trials > 1:
        with ThreadPoolExecutor(config.parallel_trials) as ex:
            return list(ex.map(lambda i: run_trial(config, i), range(config.trials)))
    return [run_trial(config, i) for i in range(config.trials)]


def write_jsonl(records: Iterable[dict], out: IO[str]) -> None:
    for rec in records:
        out.write(json.dumps(rec, sort_keys=True) + "\n")


def read_jsonl(lines: Iterable[str]) -> list[dict]:
    out = []
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"line {n}: not JSON ({exc.msg})") from None
        if rec.get("schema") != SCHEMA_VERSION:
            raise ConfigurationError(f"line {n}: unsupported schema {rec.get('schema')!r}")
        out.append(rec)
    return out


def strip_times(record: dict) -> dict:
    return {k: v for k, v in record.items() if k not in TIME_FIELDS}


# -- bucket charts -------------------------------------------------------------


@dataclass
class BucketRow:
    task: str
    bucket: str
    mean_time: Optional[float]
    solve_rate: float


def bucket_for(seconds: Optional[float]) -> str:
    if seconds is None:
        return UNSOLVED
    for limit, name in BUCKETS:
        if seconds <= limit:
            return name
    return UNSOLVED


def emit_buckets(records: Iterable[dict], rule: str = "mean") -> list[BucketRow]:
    """One row per task.

    ``mean``: the task is placed by the mean time over its trials and is
    unsolved if any trial is.  ``any``: placed by its fastest solving trial,
    unsolved only if no trial solved it.  ``mean_time`` is the mean over the
    solving trials, in seconds.
    """
    if rule not in ("mean", "any"):
        raise ConfigurationError("rule must be 'mean' or 'any'")
    by_task: dict[str, list[Optional[float]]] = {}
    for rec in records:
        t = rec["time_ms"] / 1000 if rec["foundbug"] else None
        by_task.setdefault(rec["task"], []).append(t)
    rows = []
    for task, times in by_task.items():
        solved = [t for t in times if t is not None]
        mean_time = statistics.fmean(solved) if solved else None
        if rule == "mean":
            placed = mean_time if len(solved) == len(times) else None
        else:
            placed = min(solved) if solved else None
        rows.append(BucketRow(task, bucket_for(placed), mean_time, len(solved) / len(times)))
    return rows


def buckets_csv(rows: list[BucketRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["task", "bucket", "mean_time", "solve_rate"])
    for r in rows:
        writer.writerow([r.task, r.bucket, "" if r.mean_time is None else f"{r.mean_time:.6f}", f"{r.solve_rate:.3f}"])
    return buf.getvalue()


def buckets_json(rows: list[BucketRow]) -> str:
    return json.dumps([asdict(r) for r in rows], indent=2)


def bucket_counts(rows: list[BucketRow]) -> dict[str, int]:
    counts = {name: 0 for _, name in BUCKETS}
    counts[UNSOLVED] = 0
    for r in rows:
        counts[r.bucket] += 1
    return counts


# -- shrink quality ------------------------------------------------------------


@dataclass
class ShrinkQuality:
    trials: list[dict]
    smaller: int = 0
    same: int = 0
    larger: int = 0
    failed: int = 0
    mean_ratio: Optional[float] = None
    stdev_ratio: Optional[float] = None


def shrink_quality_report(records: Iterable[dict]) -> ShrinkQuality:
    """Per failing trial: original size, shrunk size and their ratio, plus a four-way outcome count.

    A trial counts as ``failed`` when the shrunk input no longer falsifies
    the property; its size is not compared.
    """
    out = ShrinkQuality(trials=[])
    ratios = []
    for rec in records:
        if not rec["foundbug"]:
            continue
        orig, shrunk = rec["original_size"], rec["shrunk_size"]
        ratio = orig / shrunk
        out.trials.append({"task": rec["task"], "seed": rec["seed"], "original": orig, "shrunk": shrunk, "ratio": ratio})
        if not rec["shrink_ok"]:
            out.failed += 1
            continue
        ratios.append(ratio)
        if shrunk < orig:
            out.smaller += 1
        elif shrunk == orig:
            out.same += 1
        else:
            out.larger += 1
    if ratios:
        out.mean_ratio = statistics.fmean(ratios)
        out.stdev_ratio = statistics.pstdev(ratios)
    return out


def seed_pool_configs(base: CampaignConfig) -> list[CampaignConfig]:
    """The 21 pool/energy configurations applied to ``base``."""
    return [CampaignConfig(**{**asdict(base), "pool": v, "energy": e}) for v, e in pool_configurations()]
