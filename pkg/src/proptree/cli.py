"""``pbt`` command line: run campaigns, build bucket charts, report shrink quality."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from typing import Optional, Sequence

from . import bench
from .runners.errors import ConfigurationError
from .workloads import get_workload, workload_names


def _add_campaign_args(ap: argparse.ArgumentParser, required: bool = True) -> None:
    ap.add_argument("--workload", required=required)
    ap.add_argument("--mutant", default="none")
    ap.add_argument("--property", dest="prop", required=required)
    ap.add_argument("--runner", default="generate", choices=bench.RUNNERS)
    ap.add_argument("--strategy", default="bespoke", choices=("bespoke", "type"))
    ap.add_argument("--pool")
    ap.add_argument("--energy", type=int)
    ap.add_argument("--scaling", default="full", choices=("full", "linear"))
    ap.add_argument("--utility", default="beats-best")
    ap.add_argument("--feedback", default="coverage", choices=("coverage", "workload"))
    ap.add_argument("--workers", type=int)
    ap.add_argument("--candidates", type=int)
    ap.add_argument("--fuel", type=int, default=100_000)
    ap.add_argument("--time-limit", type=float, default=60.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=1)
    ap.add_argument("--shrink-rounds", type=int, default=10)
    ap.add_argument("--parallel-trials", type=int, default=1)
    ap.add_argument("--size", type=int, help="fixed generation size (default: log2 of the trial count)")


def _config(args) -> bench.CampaignConfig:
    return bench.CampaignConfig(
        workload=args.workload,
        mutant=args.mutant,
        prop=args.prop,
        runner=args.runner,
        strategy=args.strategy,
        pool=args.pool,
        energy=args.energy,
        scaling=args.scaling,
        utility=args.utility,
        feedback=args.feedback,
        workers=args.workers,
        candidates=args.candidates,
        fuel=args.fuel,
        time_limit=args.time_limit,
        seed=args.seed,
        trials=args.trials,
        shrink_rounds=args.shrink_rounds,
        parallel_trials=args.parallel_trials,
        size=args.size,
    )


def _read(paths: Sequence[str]) -> list[dict]:
    records = []
    for path in paths:
        with open(path) as fh:
            records.extend(bench.read_jsonl(fh))
    return records


def cmd_run(args) -> None:
    records = bench.run_campaign(_config(args))
    if args.out:
        with open(args.out, "a") as fh:
            bench.write_jsonl(records, fh)
    else:
        bench.write_jsonl(records, sys.stdout)


def cmd_buckets(args) -> None:
    rows = bench.emit_buckets(_read(args.results), args.rule)
    sys.stdout.write(bench.buckets_json(rows) + "\n" if args.format == "json" else bench.buckets_csv(rows))


def cmd_shrink_report(args) -> None:
    if args.results:
        records = _read(args.results)
    elif args.workload:
        records = bench.run_campaign(_config(args))
    else:
        raise ConfigurationError("give results files or a campaign (--workload/--property)")
    q = bench.shrink_quality_report(records)
    json.dump(asdict(q), sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_list(args) -> None:
    names = [args.workload] if args.workload else workload_names()
    for name in names:
        w = get_workload(name)
        for t in w.tasks():
            print(t.id)


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pbt", description="Property-based testing campaigns over benchmark workloads.")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a campaign and emit JSON-lines records")
    _add_campaign_args(run)
    run.add_argument("--out", help="append records to this file instead of stdout")
    run.set_defaults(fn=cmd_run)

    b = sub.add_parser("buckets", help="bucket-chart data from results files")
    b.add_argument("results", nargs="+")
    b.add_argument("--rule", default="mean", choices=("mean", "any"))
    b.add_argument("--format", default="csv", choices=("csv", "json"))
    b.set_defaults(fn=cmd_buckets)

    s = sub.add_parser("shrink-report", help="shrink quality statistics from results files or a fresh campaign")
    s.add_argument("results", nargs="*")
    _add_campaign_args(s, required=False)
    s.set_defaults(fn=cmd_shrink_report)

    ls = sub.add_parser("list", help="list solvable tasks")
    ls.add_argument("--workload")
    ls.set_defaults(fn=cmd_list)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parser().parse_args(argv)
    try:
        args.fn(args)
    except (ConfigurationError, ValueError, OSError) as exc:
        print(f"pbt: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
