"""Command line entry point: ``gramdex run|synth|index``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .bench import RunConfig, run, select
from .index_plan import build_index, dump_index, load_index, SnapshotError
from .regex_literal import escape_bytes
from .select_best import BestConfig
from .select_free import FreeConfig
from .select_lpms import LpmsConfig
from .selection import Deadline
from .workload import SyntheticSpec, WorkloadError, load_workload, write_synthetic

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TIMEOUT = 3


def _method_config(args) -> tuple:
    method = args.method.upper()
    if method == "LPMS":
        method = "LPMS-D"
    seed = args.seed
    if os.environ.get("GRAMDEX_SEED") is not None:
        seed = int(os.environ["GRAMDEX_SEED"])
    if method == "FREE":
        cfg = FreeConfig(c=args.c if args.c is not None else 0.1,
                         max_n=args.max_n or 4, presuf=args.presuf, max_keys=args.max_keys)
    elif method == "BEST":
        cfg = BestConfig(c=args.c if args.c is not None else 0.1,
                         max_keys=args.max_keys if args.max_keys is not None else 100,
                         clusters=args.clusters, kmedian_max_iter=args.kmedian_iter,
                         reduction_factor=args.reduction, seed=seed, max_n=args.max_n)
    elif method in ("LPMS-D", "LPMS-R"):
        cfg = LpmsConfig(mode="deterministic" if method == "LPMS-D" else "randomized",
                         max_n=args.max_n or 10, max_keys=args.max_keys,
                         round_threshold=args.theta, random_trials=args.trials, seed=seed)
    else:
        raise ValueError(f"unknown method {args.method!r}")
    return method, cfg


def _add_method_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", required=True, help="free, best, lpms-d or lpms-r")
    p.add_argument("--c", type=float, default=None, help="selectivity threshold")
    p.add_argument("--max-n", type=int, default=None)
    p.add_argument("--max-keys", type=int, default=None)
    p.add_argument("--presuf", action="store_true", help="FREE: pre-suf minimal instead of prefix-minimal")
    p.add_argument("--clusters", type=int, default=1, help="BEST: sub-problem count")
    p.add_argument("--reduction", type=float, default=1.0, help="BEST: workload reduction factor t")
    p.add_argument("--kmedian-iter", type=int, default=10)
    p.add_argument("--theta", type=float, default=0.5, help="LPMS-D rounding threshold")
    p.add_argument("--trials", type=int, default=16, help="LPMS-R rounding trials")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--data", required=True)
    p.add_argument("--queries", required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gramdex", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="select, index, filter and verify; write metrics")
    _add_method_args(p)
    p.add_argument("--test-queries", default=None, help="evaluate on this query file instead")
    p.add_argument("--out", default=None, help="results .csv or .json")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--time-limit", type=float, default=3 * 3600.0, help="seconds")

    p = sub.add_parser("synth", help="generate a synthetic workload")
    p.add_argument("--spec", required=True, help="JSON file with SyntheticSpec fields")
    p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("index", help="build or inspect index snapshots")
    isub = p.add_subparsers(dest="index_command", required=True)
    b = isub.add_parser("build")
    _add_method_args(b)
    b.add_argument("--out", required=True, help="snapshot path")
    b.add_argument("--threads", type=int, default=1)
    d = isub.add_parser("dump")
    d.add_argument("snapshot")
    return parser


def _cmd_run(args) -> int:
    method, cfg = _method_config(args)
    rc = RunConfig(method, cfg, data_path=args.data, query_path=args.queries,
                   test_query_path=args.test_queries, output_path=args.out,
                   threads=args.threads, time_limit=args.time_limit)
    metrics = run(rc)
    row = metrics.row()
    print(",".join(row))
    print(",".join(str(v) for v in row.values()))
    return EXIT_TIMEOUT if metrics.status == "timeout" else EXIT_OK


def _cmd_synth(args) -> int:
    spec = SyntheticSpec.from_json(Path(args.spec).read_text())
    paths = write_synthetic(spec, args.out)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return EXIT_OK


def _cmd_index(args) -> int:
    if args.index_command == "build":
        method, cfg = _method_config(args)
        workload = load_workload(args.data, args.queries)
        selection = select(workload, method, cfg, args.threads, Deadline(None))
        index = build_index(workload, selection.grams)
        Path(args.out).write_bytes(dump_index(index))
        print(f"{index.key_count} keys, {index.total_posting_entries} postings -> {args.out}")
        return EXIT_OK
    index = load_index(Path(args.snapshot).read_bytes())
    print(f"records {index.record_count} keys {index.key_count} bytes {index.byte_size}")
    for key, posting in index.postings.items():
        print(f"{escape_bytes(key)}\t{len(posting)}\t{' '.join(map(str, posting.tolist()))}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "synth":
            return _cmd_synth(args)
        return _cmd_index(args)
    except (ValueError, WorkloadError, SnapshotError, OSError) as exc:
        print(f"gramdex: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
