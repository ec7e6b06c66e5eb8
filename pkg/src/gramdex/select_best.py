"""Query-aware greedy selection by marginal utility (benefit per posting).

A gram ``g`` covers every (query, record) pair where ``g`` occurs in the
query's literals but not in the record. The greedy loop repeatedly adds the
gram with the largest ``benefit / cost``: newly covered pairs divided by the
posting-list length.

Coverage bookkeeping uses Python ints as record bitsets. ``uncovered[q]``
holds the records not yet filtered for query ``q``; ``absent[g]`` the
records lacking ``g``; the benefit of ``g`` is the popcount of their
intersection summed over the queries containing ``g``.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .gram import query_grams, record_support
from .index_plan import build_index
from .kmedian import distance_matrix, k_median, query_distance
from .regex_literal import escape_bytes
from .selection import Deadline, SelectionResult
from .workload import Workload

__all__ = [
    "BestConfig",
    "CoverLists",
    "cover",
    "benefit",
    "utility",
    "gram_cost",
    "reduce_workload",
    "select_best",
    "write_trace_csv",
    "query_distance",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BestConfig:
    c: float = 0.1
    max_keys: int = 100
    clusters: int = 1
    kmedian_max_iter: int = 10
    reduction_factor: float = 1.0
    seed: int = 0
    max_n: Optional[int] = None  # cap on candidate length; None = whole literals

    def __post_init__(self):
        if not 0 < self.c <= 1:
            raise ValueError(f"c must be in (0, 1], got {self.c}")
        if self.max_keys < 0:
            raise ValueError("max_keys must be >= 0")
        if self.clusters < 1 or self.kmedian_max_iter < 0:
            raise ValueError("clusters must be >= 1 and kmedian_max_iter >= 0")
        if self.reduction_factor < 1:
            raise ValueError("reduction_factor must be >= 1")
        if self.max_n is not None and self.max_n < 1:
            raise ValueError("max_n must be >= 1")


def _bitset(ids, n: int) -> int:
    bits = np.zeros(n, dtype=bool)
    bits[np.asarray(ids, dtype=np.int64)] = True
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


def gram_cost(s_d: int) -> int:
    """Posting-list length, floored at 1 for grams absent from the data."""
    return max(s_d, 1)


# --------------------------------------------------------------------------
# Cover, benefit, utility against a plain workload (reference definitions)

def _gram_sets(workload: Workload, max_n=None) -> list:
    return [query_grams(q.literals, max_n) for q in workload.queries]


def cover(g: bytes, workload: Workload, gram_sets: Optional[Sequence[set]] = None) -> set:
    """All (query id, record id) pairs with ``g`` in the query and not in the record."""
    sets = gram_sets if gram_sets is not None else _gram_sets(workload)
    queries = [qi for qi, s in enumerate(sets) if g in s]
    absent = [r.id for r in workload.records if g not in r.text]
    return {(q, d) for q in queries for d in absent}


def benefit(g: bytes, selected: Iterable[bytes], workload: Workload,
            gram_sets: Optional[Sequence[set]] = None) -> int:
    """Pairs ``g`` would newly cover given ``selected``, without building pair sets."""
    sets = gram_sets if gram_sets is not None else _gram_sets(workload)
    selected = list(selected)
    n = workload.record_count
    full = (1 << n) - 1
    texts = workload.texts
    absent_g = full ^ _bitset([i for i, t in enumerate(texts) if g in t], n)
    present = {s: _bitset([i for i, t in enumerate(texts) if s in t], n) for s in selected}
    total = 0
    for qs in sets:
        if g not in qs:
            continue
        uncovered = full
        for s in selected:
            if s in qs:
                uncovered &= present[s]
        total += (uncovered & absent_g).bit_count()
    return total


def utility(g: bytes, selected: Iterable[bytes], workload: Workload,
            gram_sets: Optional[Sequence[set]] = None) -> Fraction:
    b = benefit(g, selected, workload, gram_sets)
    s_d = sum(1 for t in workload.texts if g in t)
    return Fraction(b, gram_cost(s_d))


# --------------------------------------------------------------------------
# Adjacency lists

@dataclass
class CoverLists:
    """Q-G-list and G-D-list over dense gram ids."""

    grams: list                 # gram id -> bytes
    qg: list                    # query id -> sorted gram ids
    gd: list                    # gram id -> sorted record ids
    record_count: int
    query_ids: list = field(default_factory=list)  # row -> original query id

    @classmethod
    def build(cls, workload: Workload, gram_sets: Sequence[set], candidates: Iterable[bytes],
              query_ids: Optional[Sequence[int]] = None) -> "CoverLists":
        grams = sorted(set(candidates), key=lambda g: (len(g), g))
        gid = {g: i for i, g in enumerate(grams)}
        qg = [sorted(gid[g] for g in s if g in gid) for s in gram_sets]
        index = build_index(workload, grams)
        gd = [index.postings[g] for g in grams]
        ids = list(query_ids) if query_ids is not None else list(range(len(gram_sets)))
        return cls(grams, qg, gd, workload.record_count, ids)


def reduce_workload(gram_sets: Sequence[set], cfg: BestConfig) -> list:
    """Indices of a representative query subset (cluster medians)."""
    n = len(gram_sets)
    target = max(1, math.ceil(n / cfg.reduction_factor))
    if cfg.reduction_factor <= 1 or n <= cfg.clusters or target >= n:
        return list(range(n))
    medoids, _ = k_median(distance_matrix(gram_sets), target, cfg.kmedian_max_iter, cfg.seed)
    return sorted(set(medoids))


def _partial_benefits(rows: Sequence[int], qg: list, uncovered: list, absent: list,
                      alive: set) -> dict:
    out: dict = {}
    for q in rows:
        u = uncovered[q]
        if not u:
            continue
        for g in qg[q]:
            if g in alive:
                out[g] = out.get(g, 0) + (u & absent[g]).bit_count()
    return out


def _rank_key(g: bytes, b: int, cost: int):
    return (-Fraction(b, cost), -b, cost, len(g), g)


def select_best(workload: Workload, cfg: BestConfig, threads: int = 1,
                deadline: Optional[Deadline] = None, trace: Optional[list] = None) -> SelectionResult:
    """Greedy max-utility selection with pruning, reduction and sub-problems.

    ``trace``, when given, receives one ``(gram, benefit, cost, utility)``
    tuple per selection.
    """
    result = SelectionResult(method="BEST")
    if not workload.queries:
        raise ValueError("BEST needs at least one query")
    if cfg.max_keys == 0:
        return result
    all_sets = _gram_sets(workload, cfg.max_n)
    keep = reduce_workload(all_sets, cfg)
    sets = [all_sets[i] for i in keep]
    pool: set = set().union(*sets) if sets else set()
    n = workload.record_count
    support = record_support(workload, pool)
    candidates = [g for g in pool if support.get(g, 0) / n <= cfg.c]
    if not candidates:
        msg = "BEST: every candidate n-gram was pruned"
        log.warning(msg)
        result.warnings.append(msg)
        return result
    lists = CoverLists.build(workload, sets, candidates, keep)

    if cfg.clusters > 1 and len(sets) > cfg.clusters:
        _, labels = k_median(distance_matrix(sets), cfg.clusters, cfg.kmedian_max_iter, cfg.seed)
        groups = [np.flatnonzero(labels == c).tolist() for c in range(cfg.clusters)]
        groups = [g for g in groups if g]
    else:
        groups = [list(range(len(sets)))]

    full = (1 << n) - 1
    present = [_bitset(ids, n) for ids in lists.gd]
    absent = [full ^ p for p in present]
    cost = [gram_cost(len(ids)) for ids in lists.gd]
    uncovered = [full] * len(sets)
    queries_of: list = [[] for _ in lists.grams]
    for q, gids in enumerate(lists.qg):
        for g in gids:
            queries_of[g].append(q)
    alive = set(range(len(lists.grams)))
    executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 and len(groups) > 1 else None
    try:
        while len(result.grams) < cfg.max_keys and alive:
            if deadline is not None and deadline.expired():
                result.timed_out = True
                break
            if executor is not None:
                parts = list(executor.map(
                    lambda rows: _partial_benefits(rows, lists.qg, uncovered, absent, alive), groups))
            else:
                parts = [_partial_benefits(rows, lists.qg, uncovered, absent, alive) for rows in groups]
            totals: dict = {}
            for part in parts:
                for g, b in part.items():
                    totals[g] = totals.get(g, 0) + b
            scored = [(b / cost[g], g) for g, b in totals.items() if b > 0]
            if not scored:
                break
            top = max(u for u, _ in scored)
            near = [g for u, g in scored if u >= top * (1 - 1e-9)]
            pick = min(near, key=lambda g: _rank_key(lists.grams[g], totals[g], cost[g]))
            gram = lists.grams[pick]
            result.grams.append(gram)
            result.per_iteration.append((len(alive), 1))
            if trace is not None:
                trace.append((gram, totals[pick], cost[pick], Fraction(totals[pick], cost[pick])))
            alive.discard(pick)
            for q in queries_of[pick]:
                uncovered[q] &= present[pick]
    finally:
        if executor is not None:
            executor.shutdown()
    result.stopped_early = len(result.grams) == cfg.max_keys and bool(alive)
    if not result.grams:
        msg = "BEST selected no n-grams"
        log.warning(msg)
        result.warnings.append(msg)
    return result


def write_trace_csv(trace: list, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "gram", "benefit", "cost", "utility"])
        for i, (g, b, c, u) in enumerate(trace, 1):
            w.writerow([i, escape_bytes(g), b, c, f"{float(u):.6f}"])
