"""N-gram enumeration, supports and selectivity."""

from __future__ import annotations

import csv
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .regex_literal import escape_bytes
from .workload import Workload, WorkloadError

# widest n-gram packed into one uint64 code
MAX_CODE_LEN = 8

__all__ = [
    "grams_of",
    "query_grams",
    "GramStats",
    "compute_stats",
    "record_support",
    "selectivity",
    "write_stats_csv",
    "WindowTable",
]


def grams_of(text: bytes, min_n: int, max_n: int) -> set:
    """All distinct substrings of ``text`` with length in ``[min_n, max_n]``."""
    if min_n < 1 or max_n < min_n:
        raise ValueError(f"need 1 <= min_n <= max_n, got {min_n}, {max_n}")
    out = set()
    size = len(text)
    for n in range(min_n, min(max_n, size) + 1):
        out.update(text[i:i + n] for i in range(size - n + 1))
    return out


def query_grams(literals: Iterable[bytes], max_n: Optional[int] = None) -> set:
    """G(q): every substring of the query's literals, optionally length-capped."""
    out: set = set()
    for lit in literals:
        out |= grams_of(lit, 1, len(lit) if max_n is None else min(max_n, len(lit)))
    return out


class WindowTable:
    """All records concatenated, for vectorized fixed-length window scans.

    A length-``n`` window (``n <= MAX_CODE_LEN``) is packed big-endian into
    a uint64, so code order equals byte order for a fixed ``n``.
    """

    def __init__(self, texts: list):
        lengths = np.fromiter((len(t) for t in texts), dtype=np.int64, count=len(texts))
        self.buf = np.frombuffer(b"".join(texts), dtype=np.uint8)
        self.rid = np.repeat(np.arange(len(texts), dtype=np.int64), lengths)
        starts = np.concatenate([[0], np.cumsum(lengths)[:-1]]) if len(texts) else np.zeros(0, np.int64)
        self.offset = np.arange(len(self.buf), dtype=np.int64) - np.repeat(starts, lengths)
        self.room = np.repeat(lengths, lengths) - self.offset  # bytes left in the record
        self._distinct: dict = {}
        self._codes: dict = {}

    def _full(self, n: int) -> np.ndarray:
        # codes at every start position; entries with room < n are junk
        hit = self._codes.get(n)
        if hit is None:
            if n == 1:
                hit = self.buf.astype(np.uint64)
            else:
                prev = self._full(n - 1)
                hit = prev << np.uint64(8)
                k = max(len(hit) - n + 1, 0)
                hit[:k] |= self.buf[n - 1:n - 1 + k]
            self._codes[n] = hit
        return hit

    def codes(self, n: int) -> tuple:
        """``(codes, record_ids)`` of every length-``n`` window in scan order."""
        if not 1 <= n <= MAX_CODE_LEN:
            raise ValueError(f"window length must be in [1, {MAX_CODE_LEN}]")
        ok = self.room >= n
        return self._full(n)[ok], self.rid[ok]

    def distinct(self, n: int) -> tuple:
        """Distinct ``(code, record)`` pairs sorted by code then record (cached)."""
        hit = self._distinct.get(n)
        if hit is None:
            hit = self._distinct[n] = _dedupe(n, *self.codes(n), len(self.buf))
        return hit

    def pairs(self, n: int, keep=None, prefix_in=None) -> tuple:
        """Distinct pairs as in :meth:`distinct`, optionally filtered.

        ``keep`` restricts to the given codes, ``prefix_in`` to windows whose
        length ``n-1`` prefix code is listed. Filtering happens before the
        dedupe unless the full table for ``n`` is already cached.
        """
        cached = n in self._distinct
        code, rid = self.distinct(n) if cached or (keep is None and prefix_in is None) else self.codes(n)
        if keep is not None:
            mask = _member(code, keep, n)
            code, rid = code[mask], rid[mask]
        if prefix_in is not None:
            mask = _member(code >> np.uint64(8), prefix_in, n - 1)
            code, rid = code[mask], rid[mask]
        if not cached and (keep is not None or prefix_in is not None):
            code, rid = _dedupe(n, code, rid, len(self.buf))
        return code, rid


def _member(code: np.ndarray, wanted, n: int) -> np.ndarray:
    """``np.isin`` with a direct lookup table when the code space is small."""
    if n > 3:
        return np.isin(code, wanted)
    table = np.zeros(1 << (8 * n), dtype=bool)
    table[np.asarray(wanted, dtype=np.int64)] = True
    return table[code.astype(np.int64)]


def _dedupe(n: int, code: np.ndarray, rid: np.ndarray, size: int) -> tuple:
    if not len(code):
        return code, rid
    if n == 1:
        seen = np.zeros((int(rid.max()) + 1, 256), dtype=bool)
        seen[rid, code.astype(np.int64)] = True
        byte, rec = np.nonzero(seen.T)
        return byte.astype(np.uint64), rec.astype(np.int64)
    if n <= 4 and size < 2 ** 32:
        # code and record id fit side by side in one 64-bit key
        key = np.unique((code << np.uint64(32)) | rid.astype(np.uint64))
        return key >> np.uint64(32), (key & np.uint64(0xFFFFFFFF)).astype(np.int64)
    order = np.lexsort((rid, code))
    code, rid = code[order], rid[order]
    first = np.ones(len(code), dtype=bool)
    first[1:] = (code[1:] != code[:-1]) | (rid[1:] != rid[:-1])
    return code[first], rid[first]


def run_counts(code: np.ndarray) -> tuple:
    """``(values, counts)`` of a sorted code array."""
    if not len(code):
        return code, np.zeros(0, dtype=np.int64)
    cuts = np.flatnonzero(code[1:] != code[:-1]) + 1
    starts = np.r_[0, cuts]
    return code[starts], np.diff(np.r_[starts, len(code)])


def encode(g: bytes) -> int:
    return int.from_bytes(g, "big")


def decode(code: int, n: int) -> bytes:
    return int(code).to_bytes(n, "big")


def table_of(workload_or_texts) -> WindowTable:
    if isinstance(workload_or_texts, Workload):
        return workload_or_texts.window_table
    return WindowTable(list(workload_or_texts))


def record_support(texts, candidates: Iterable[bytes]) -> Counter:
    """s_D for each candidate: the number of texts containing it at least once.

    ``texts`` is a list of byte strings or a :class:`Workload` (whose window
    table is cached).
    """
    by_len: dict = defaultdict(set)
    for g in candidates:
        by_len[len(g)].add(g)
    counts: Counter = Counter()
    slow = {n: c for n, c in by_len.items() if n > MAX_CODE_LEN}
    if len(slow) < len(by_len):
        table = table_of(texts)
        for n, cands in by_len.items():
            if n in slow:
                continue
            keep = np.fromiter((encode(g) for g in cands), dtype=np.uint64, count=len(cands))
            code, _ = table.pairs(n, keep=keep)
            uniq, cnt = run_counts(code)
            counts.update({decode(c, n): int(k) for c, k in zip(uniq.tolist(), cnt.tolist())})
    if not slow:
        return counts
    if isinstance(texts, Workload):
        texts = texts.texts
    for text in texts:
        size = len(text)
        for n, cands in slow.items():
            if n > size:
                continue
            windows = {text[i:i + n] for i in range(size - n + 1)}
            if len(windows) < len(cands):
                counts.update(windows & cands)
            else:
                counts.update(g for g in cands if g in windows)
    return counts


@dataclass
class GramStats:
    s_D: dict
    s_Q: dict
    record_count: int

    def selectivity(self, g: bytes) -> float:
        return selectivity(self, g)


def compute_stats(workload: Workload, candidates: Iterable[bytes]) -> GramStats:
    candidates = set(candidates)
    if not candidates:
        raise ValueError("compute_stats needs at least one candidate")
    s_d = record_support(workload, candidates)
    s_q: Counter = Counter()
    for q in workload.queries:
        # a query counts once however many of its literals contain g
        s_q.update(query_grams(q.literals) & candidates)
    return GramStats(
        s_D={g: s_d.get(g, 0) for g in candidates},
        s_Q={g: s_q.get(g, 0) for g in candidates},
        record_count=workload.record_count,
    )


def selectivity(stats: GramStats, g: bytes) -> float:
    if stats.record_count == 0:
        raise WorkloadError("selectivity undefined on a workload without records")
    return stats.s_D.get(g, 0) / stats.record_count


def write_stats_csv(stats: GramStats, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gram", "s_D", "s_Q", "selectivity"])
        for g in sorted(stats.s_D):
            w.writerow([escape_bytes(g), stats.s_D[g], stats.s_Q.get(g, 0),
                        f"{selectivity(stats, g):.6f}"])
