"""End-to-end pipeline: select, build, plan, filter, verify, measure."""

from __future__ import annotations

import csv
import json
import logging
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

from .index_plan import ALL, InvertedIndex, build_index, compile_plan, evaluate_plan
from .regex_literal import RegexParseError, escape_bytes
from .regex_match import AstMatcher
from .select_best import BestConfig, select_best
from .select_free import FreeConfig, select_free
from .select_lpms import LpmsConfig, select_lpms
from .selection import Deadline, SelectionResult
from .workload import RegexQuery, Workload, load_workload, read_queries

__all__ = [
    "METHODS",
    "RunConfig",
    "QueryResult",
    "Metrics",
    "PeakMemory",
    "verify",
    "compile_verifier",
    "select",
    "run",
    "run_workload",
    "full_scan",
    "write_report",
    "CSV_COLUMNS",
]

log = logging.getLogger(__name__)

METHODS = ("FREE", "BEST", "LPMS-D", "LPMS-R")
DEFAULT_TIME_LIMIT = 3 * 3600.0
CSV_COLUMNS = ["method", "config", "K", "key_count", "T_I_s", "T_Q_s",
               "S_Q_bytes", "S_I_bytes", "precision", "status"]

MethodConfig = Union[FreeConfig, BestConfig, LpmsConfig]


@dataclass
class RunConfig:
    method: str
    config: MethodConfig
    data_path: Optional[str] = None
    query_path: Optional[str] = None
    test_query_path: Optional[str] = None
    output_path: Optional[str] = None
    threads: int = 1
    time_limit: Optional[float] = DEFAULT_TIME_LIMIT

    def __post_init__(self):
        self.method = self.method.upper()
        if self.method == "LPMS":
            self.method = "LPMS-D"
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        expected = {"FREE": FreeConfig, "BEST": BestConfig}.get(self.method, LpmsConfig)
        if not isinstance(self.config, expected):
            raise ValueError(f"{self.method} needs a {expected.__name__}")
        if self.method.startswith("LPMS"):
            mode = "deterministic" if self.method == "LPMS-D" else "randomized"
            if self.config.mode != mode:
                raise ValueError(f"{self.method} needs LpmsConfig(mode={mode!r})")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass
class QueryResult:
    query_id: int
    pattern: bytes
    candidates: int
    tp: int
    fp: int
    full_scan: bool
    error: Optional[str] = None
    matches: Optional[list] = None


@dataclass
class Metrics:
    method: str
    config: str
    K: Optional[int]
    key_count: int
    T_I: float
    T_Q: float
    S_Q: int
    S_I: int
    precision: float
    status: str = "ok"
    S_Q_method: str = ""
    queries: list = field(default_factory=list)
    selection: Optional[SelectionResult] = None

    @property
    def tp(self) -> int:
        return sum(q.tp for q in self.queries)

    @property
    def fp(self) -> int:
        return sum(q.fp for q in self.queries)

    def row(self) -> dict:
        return {
            "method": self.method,
            "config": self.config,
            "K": "" if self.K is None else self.K,
            "key_count": self.key_count,
            "T_I_s": f"{self.T_I:.6f}",
            "T_Q_s": f"{self.T_Q:.6f}",
            "S_Q_bytes": self.S_Q,
            "S_I_bytes": self.S_I,
            "precision": f"{self.precision:.6f}",
            "status": self.status,
        }

    def to_dict(self) -> dict:
        out = self.row()
        out["S_Q_method"] = self.S_Q_method
        out["TP"], out["FP"] = self.tp, self.fp
        out["queries"] = [
            {"id": q.query_id, "pattern": escape_bytes(q.pattern), "candidates": q.candidates,
             "TP": q.tp, "FP": q.fp, "full_scan": q.full_scan, "error": q.error}
            for q in self.queries
        ]
        if self.selection is not None:
            out["selection"] = self.selection.to_dict()
        return out


def micro_precision(results: Sequence[QueryResult]) -> float:
    """sum TP / (sum TP + sum FP); an empty denominator counts as 1."""
    tp = sum(q.tp for q in results)
    fp = sum(q.fp for q in results)
    return 1.0 if tp + fp == 0 else tp / (tp + fp)


# --------------------------------------------------------------------------
# verification

def compile_verifier(pattern: bytes):
    """Compiled matcher for ``pattern``: Python's ``re``, else the AST engine."""
    try:
        return re.compile(pattern)
    except re.error:
        return AstMatcher(pattern)


def verify(record: bytes, query: Union[bytes, RegexQuery]) -> bool:
    """Full (unanchored) regex match of ``query`` against ``record``."""
    pattern = query.pattern if isinstance(query, RegexQuery) else query
    return bool(compile_verifier(pattern).search(record))


def full_scan(workload: Workload, queries: Optional[Sequence[RegexQuery]] = None) -> list:
    """Ground truth: the matching record ids of every query, by brute force."""
    out = []
    for q in (workload.queries if queries is None else queries):
        m = compile_verifier(q.pattern)
        out.append([i for i, t in enumerate(workload.texts) if m.search(t)])
    return out


# --------------------------------------------------------------------------
# memory

class PeakMemory:
    """Peak resident set size sampled by a background thread."""

    method = "rss-sampled-10ms"

    def __init__(self, interval: float = 0.01):
        self.interval = interval
        self.peak = 0
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None
        try:
            import psutil
            self._proc = psutil.Process()
        except Exception:  # pragma: no cover - psutil is a declared dependency
            self._proc = None
            self.method = "ru_maxrss"

    def _rss(self) -> int:
        if self._proc is not None:
            return int(self._proc.memory_info().rss)
        import resource
        return int(resource.getrusage(resource.RUSAGE_SELF).ru_maxrss) * 1024

    def _loop(self) -> None:
        while not self._stop.is_set():
            self.peak = max(self.peak, self._rss())
            self._stop.wait(self.interval)

    def __enter__(self) -> "PeakMemory":
        self.peak = self._rss()
        self._thread = threading.Thread(target=self._loop, daemon=True)
        self._thread.start()
        return self

    def __exit__(self, *exc) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join()
        self.peak = max(self.peak, self._rss())


# --------------------------------------------------------------------------
# pipeline

def _seed_override(cfg: MethodConfig) -> MethodConfig:
    raw = os.environ.get("GRAMDEX_SEED")
    if raw is None or not hasattr(cfg, "seed"):
        return cfg
    from dataclasses import replace
    return replace(cfg, seed=int(raw))


def describe_config(cfg: MethodConfig) -> str:
    skip = {"max_keys"}
    parts = []
    for k, v in asdict(cfg).items():
        if k in skip:
            continue
        parts.append(f"{k}={int(v) if isinstance(v, bool) else v}")
    return ";".join(parts)


def select(workload: Workload, method: str, cfg: MethodConfig, threads: int = 1,
           deadline: Optional[Deadline] = None) -> SelectionResult:
    method = method.upper()
    if method == "FREE":
        return select_free(workload, cfg, deadline)
    if method == "BEST":
        return select_best(workload, cfg, threads=threads, deadline=deadline)
    if method in ("LPMS", "LPMS-D", "LPMS-R"):
        return select_lpms(workload, cfg, deadline)
    raise ValueError(f"unknown method {method!r}")


def _evaluate_query(q: RegexQuery, index: InvertedIndex, texts: list, keep_matches: bool) -> QueryResult:
    n = len(texts)
    error = None
    try:
        matcher = re.compile(q.pattern)
    except re.error as exc:
        error = f"re: {exc}"
        try:
            matcher = AstMatcher(q.pattern)
        except RegexParseError as exc2:
            log.error("query %d cannot be verified: %s", q.id, exc2)
            return QueryResult(q.id, q.pattern, 0, 0, 0, True, f"{error}; {exc2}", [] if keep_matches else None)
    tree = q.tree
    plan = compile_plan(tree, index) if error is None else ALL
    ids = evaluate_plan(plan, index, n).tolist()
    matches = [i for i in ids if matcher.search(texts[i])]
    return QueryResult(q.id, q.pattern, len(ids), len(matches), len(ids) - len(matches),
                       plan is ALL, error, matches if keep_matches else None)


def run_workload(workload: Workload, method: str, cfg: MethodConfig, *,
                 test_queries: Optional[Sequence[RegexQuery]] = None, threads: int = 1,
                 time_limit: Optional[float] = DEFAULT_TIME_LIMIT,
                 keep_matches: bool = False) -> Metrics:
    """Run the pipeline on an in-memory workload.

    Selection sees ``workload.queries``; evaluation uses ``test_queries``
    when given (unseen-query robustness runs).
    """
    method = method.upper()
    if method == "LPMS":
        method = "LPMS-D"
    cfg = _seed_override(cfg)
    eval_queries = list(workload.queries if test_queries is None else test_queries)
    # a fresh view drops window tables cached by earlier runs, so T_I pays for its own scans
    workload = Workload(workload.queries, workload.records)
    with PeakMemory() as mem:
        deadline = Deadline(time_limit)
        t0 = time.perf_counter()
        selection = select(workload, method, cfg, threads, deadline)
        index = build_index(workload, selection.grams)
        t_i = time.perf_counter() - t0

        t0 = time.perf_counter()
        texts = workload.texts
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(lambda q: _evaluate_query(q, index, texts, keep_matches), eval_queries))
        else:
            results = [_evaluate_query(q, index, texts, keep_matches) for q in eval_queries]
        t_q = time.perf_counter() - t0
    return Metrics(
        method=method,
        config=describe_config(cfg),
        K=getattr(cfg, "max_keys", None),
        key_count=index.key_count,
        T_I=t_i,
        T_Q=t_q,
        S_Q=mem.peak,
        S_I=index.byte_size,
        precision=micro_precision(results),
        status="timeout" if selection.timed_out else "ok",
        S_Q_method=mem.method,
        queries=results,
        selection=selection,
    )


def run(cfg: RunConfig) -> Metrics:
    if cfg.data_path is None or cfg.query_path is None:
        raise ValueError("run() needs data_path and query_path")
    workload = load_workload(cfg.data_path, cfg.query_path)
    tests = read_queries(cfg.test_query_path) if cfg.test_query_path else None
    metrics = run_workload(workload, cfg.method, cfg.config, test_queries=tests,
                           threads=cfg.threads, time_limit=cfg.time_limit)
    if cfg.output_path:
        write_report([metrics], cfg.output_path)
    return metrics


def write_report(metrics: Sequence[Metrics], path, fmt: Optional[str] = None) -> None:
    """CSV (one row per run) or JSON with per-query detail, chosen by suffix."""
    path = Path(path)
    fmt = fmt or ("json" if path.suffix == ".json" else "csv")
    if fmt == "json":
        path.write_text(json.dumps([m.to_dict() for m in metrics], indent=2) + "\n")
        return
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        w.writeheader()
        for m in metrics:
            w.writerow(m.row())
