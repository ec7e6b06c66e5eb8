"""Dataset-driven selection of prefix-minimal useful n-grams.

The search is breadth-first over n-gram length, apriori style: iteration
``i`` only looks at length-``i`` grams whose length ``i-1`` prefix was
useless (selectivity at or above the threshold), so useful grams are never
extended and the output is prefix-minimal.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .gram import MAX_CODE_LEN, decode, encode, grams_of, run_counts
from .selection import Deadline, SelectionResult
from .workload import Workload

__all__ = ["FreeConfig", "select_free"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FreeConfig:
    c: float = 0.1
    max_n: int = 4
    presuf: bool = False
    max_keys: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.c <= 1:
            raise ValueError(f"c must be in (0, 1], got {self.c}")
        if self.max_n < 1:
            raise ValueError(f"max_n must be >= 1, got {self.max_n}")
        if self.max_keys is not None and self.max_keys < 0:
            raise ValueError("max_keys must be >= 0")


def _extension_counts(workload: Workload, n: int, seeds: Optional[set]) -> Counter:
    """Record support of every length-``n`` window whose prefix is in ``seeds``."""
    if n <= MAX_CODE_LEN:
        prefix = None
        if n > 1:
            prefix = np.fromiter((encode(g) for g in seeds), dtype=np.uint64, count=len(seeds))
        code, _ = workload.window_table.pairs(n, prefix_in=prefix)
        uniq, cnt = run_counts(code)
        return Counter({decode(c, n): k for c, k in zip(uniq.tolist(), cnt.tolist())})
    counts: Counter = Counter()
    texts = workload.texts
    for text in texts:
        if n == 1:
            counts.update(set(text[i:i + 1] for i in range(len(text))))
            continue
        found = set()
        for i in range(len(text) - n + 1):
            w = text[i:i + n]
            if w[:-1] in seeds:
                found.add(w)
        counts.update(found)
    return counts


def select_free(workload: Workload, cfg: FreeConfig,
                deadline: Optional[Deadline] = None) -> SelectionResult:
    result = SelectionResult(method="FREE")
    n_records = workload.record_count
    budget = cfg.max_keys
    if budget == 0:
        result.stopped_early = True
        return result
    selected: set = set()
    useless: Optional[set] = None
    for n in range(1, cfg.max_n + 1):
        if deadline is not None and deadline.expired():
            result.timed_out = True
            break
        counts = _extension_counts(workload, n, useless)
        useful = []
        useless = set()
        for g, s in counts.items():
            if s / n_records < cfg.c:
                useful.append((s, g))
            else:
                useless.add(g)
        if cfg.presuf and n > 1:
            # prefixes are useless by construction, so only suffix-side substrings remain
            useful = [(s, g) for s, g in useful
                      if not (grams_of(g[1:], 1, n - 1) & selected)]
        useful.sort()
        take = useful
        if budget is not None and len(result.grams) + len(useful) >= budget:
            take = useful[:budget - len(result.grams)]
        for _, g in take:
            result.grams.append(g)
            selected.add(g)
        result.per_iteration.append((len(counts), len(take)))
        if budget is not None and len(result.grams) >= budget:
            result.stopped_early = len(take) < len(useful) or (bool(useless) and n < cfg.max_n)
            break
        if not useless:
            break
    if not result.grams:
        msg = "FREE selected no n-grams"
        log.warning(msg)
        result.warnings.append(msg)
    return result
