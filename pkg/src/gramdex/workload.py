"""Workloads: a regex query set paired with a line-oriented byte dataset."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from functools import cached_property
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .regex_literal import LiteralTree, literal_tree, literals

__all__ = [
    "WorkloadError",
    "DataRecord",
    "RegexQuery",
    "Workload",
    "SyntheticSpec",
    "load_workload",
    "read_records",
    "read_queries",
    "write_workload",
    "generate_synthetic",
    "write_synthetic",
]


class WorkloadError(Exception):
    """Raised for unreadable inputs or degenerate workloads."""


@dataclass(frozen=True)
class DataRecord:
    id: int
    text: bytes


@dataclass(frozen=True)
class RegexQuery:
    id: int
    pattern: bytes

    @cached_property
    def tree(self) -> Optional[LiteralTree]:
        return literal_tree(self.pattern)

    @cached_property
    def literals(self) -> list:
        return literals(self.tree)


@dataclass(frozen=True)
class Workload:
    queries: tuple
    records: tuple

    def __post_init__(self):
        for i, r in enumerate(self.records):
            if r.id != i:
                raise WorkloadError(f"record ids must be dense, got {r.id} at {i}")
        for i, q in enumerate(self.queries):
            if q.id != i:
                raise WorkloadError(f"query ids must be dense, got {q.id} at {i}")

    @classmethod
    def from_texts(cls, records: Sequence, queries: Sequence) -> "Workload":
        """Build from plain byte strings (``str`` is UTF-8 encoded)."""
        recs = tuple(DataRecord(i, _b(t)) for i, t in enumerate(records))
        qs = tuple(RegexQuery(i, _b(p)) for i, p in enumerate(queries))
        return cls(qs, recs)

    def with_queries(self, queries: Sequence) -> "Workload":
        qs = tuple(RegexQuery(i, q.pattern if isinstance(q, RegexQuery) else _b(q))
                   for i, q in enumerate(queries))
        return Workload(qs, self.records)

    @cached_property
    def texts(self) -> list:
        return [r.text for r in self.records]

    @cached_property
    def alphabet(self) -> frozenset:
        seen: set = set()
        for t in self.texts:
            seen.update(t)
        return frozenset(seen)

    @cached_property
    def window_table(self):
        from .gram import WindowTable
        return WindowTable(self.texts)

    @property
    def record_count(self) -> int:
        return len(self.records)

    @property
    def total_bytes(self) -> int:
        return sum(len(t) for t in self.texts)


def _b(x) -> bytes:
    return x.encode("utf-8") if isinstance(x, str) else bytes(x)


def _read_lines(path) -> list:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise WorkloadError(f"cannot read {path}: {exc}") from exc
    if not data:
        return []
    lines = data.split(b"\n")
    if lines[-1] == b"":
        lines.pop()
    return lines


def read_records(path) -> tuple:
    return tuple(DataRecord(i, t) for i, t in enumerate(_read_lines(path)))


def read_queries(path) -> tuple:
    return tuple(RegexQuery(i, p) for i, p in enumerate(_read_lines(path)))


def load_workload(dataset_path, query_path) -> Workload:
    records = read_records(dataset_path)
    if not records:
        raise WorkloadError(f"zero records in {dataset_path}")
    queries = read_queries(query_path)
    if not queries:
        raise WorkloadError(f"zero queries in {query_path}")
    return Workload(queries, records)


def write_workload(workload: Workload, dataset_path, query_path) -> None:
    _write_lines(dataset_path, workload.texts)
    _write_lines(query_path, [q.pattern for q in workload.queries])


def _write_lines(path, lines) -> None:
    for line in lines:
        if b"\n" in line:
            raise WorkloadError("lines may not contain newlines")
    Path(path).write_bytes(b"".join(line + b"\n" for line in lines))


# --------------------------------------------------------------------------
# Synthetic workloads

@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the synthetic generator.

    Record lengths are geometric on {1, 2, ...}; characters are drawn from
    the inclusive byte range ``alphabet``. ``char_skew`` > 0 draws characters
    with Zipf-like weights ``1 / rank**char_skew`` instead of uniformly.
    ``literal_skew`` > 0 makes queries share literals: every query is copied
    from a pool of ``literal_pool`` sliced templates, picked with weights
    ``1 / rank**literal_skew``.
    """

    record_count: int = 5000
    geometric_p: float = 1 / 32
    alphabet: tuple = (ord("A"), ord("P"))
    index_query_fraction: float = 0.10
    test_query_fraction: float = 0.02
    seed: int = 0
    char_skew: float = 0.0
    max_gap: int = 50
    literal_skew: float = 0.0
    literal_pool: int = 50

    def __post_init__(self):
        if self.record_count < 1:
            raise WorkloadError("record_count must be positive")
        if not 0 < self.geometric_p <= 1:
            raise WorkloadError("geometric_p must be in (0, 1]")
        for name in ("index_query_fraction", "test_query_fraction"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise WorkloadError(f"{name} must be in (0, 1]")
        lo, hi = self.alphabet
        if not 0 <= lo <= hi <= 255 or lo == 0x0A == hi:
            raise WorkloadError(f"bad alphabet range {self.alphabet}")
        if self.char_skew < 0 or self.literal_skew < 0:
            raise WorkloadError("char_skew and literal_skew must be >= 0")
        if self.literal_pool < 1 or self.max_gap < 1:
            raise WorkloadError("literal_pool and max_gap must be >= 1")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SyntheticSpec":
        raw = json.loads(text)
        if "alphabet" in raw:
            a = raw["alphabet"]
            if isinstance(a, str):
                lo, _, hi = a.partition("-")
                a = (ord(lo), ord(hi or lo))
            raw["alphabet"] = tuple(a)
        try:
            return cls(**raw)
        except TypeError as exc:
            raise WorkloadError(f"bad synthetic spec: {exc}") from exc


def _chars(spec: SyntheticSpec) -> tuple:
    lo, hi = spec.alphabet
    chars = np.array([b for b in range(lo, hi + 1) if b != 0x0A], dtype=np.uint8)
    if spec.char_skew > 0:
        return chars, _zipf(len(chars), spec.char_skew)
    return chars, None


def _zipf(n: int, skew: float) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1) ** skew
    return w / w.sum()


def _make_queries(rng: np.random.Generator, texts: list, fraction: float, max_gap: int,
                  spec: Optional["SyntheticSpec"] = None) -> list:
    n = len(texts)
    count = max(1, int(round(fraction * n)))
    if spec is not None and spec.literal_skew > 0:
        pool = _make_queries(rng, texts, min(spec.literal_pool, n) / n, max_gap)
        rng.shuffle(pool)
        picks = rng.choice(len(pool), size=count, p=_zipf(len(pool), spec.literal_skew))
        return [pool[i] for i in picks.tolist()]
    picks = rng.choice(n, size=count, replace=False)
    out = []
    for i in sorted(picks.tolist()):
        text = texts[i]
        len1 = int(rng.integers(1, 6))
        len2 = int(rng.integers(0, 6))
        gap = int(rng.integers(1, max_gap + 1))
        len1 = min(len1, len(text))
        # shrink the gap and tail until the slice fits in the record
        room = len(text) - len1
        gap = min(gap, room) if room > 0 else 0
        len2 = min(len2, max(0, room - gap))
        total = len1 + gap + len2
        start = int(rng.integers(0, len(text) - total + 1))
        lit1 = text[start:start + len1]
        lit2 = text[start + len1 + gap:start + total]
        out.append(_escape_literal(lit1) + f".{{1,{max_gap}}}".encode() * (gap > 0) + _escape_literal(lit2))
    return out


_META = frozenset(b"\\.^$|?*+()[]{}")


def _escape_literal(data: bytes) -> bytes:
    return b"".join(b"\\" + bytes([c]) if c in _META else bytes([c]) for c in data)


def generate_synthetic(spec: SyntheticSpec) -> tuple:
    """Build ``(workload, test_queries)`` deterministically from ``spec``.

    Each query is ``lit1 .{1,max_gap} lit2`` sliced from a random record, so
    it always matches its source. Records too short for a gap yield a bare
    ``lit1`` query.
    """
    rng = np.random.default_rng(spec.seed)
    chars, weights = _chars(spec)
    lengths = rng.geometric(spec.geometric_p, size=spec.record_count)
    texts = []
    for n in lengths.tolist():
        idx = rng.choice(len(chars), size=n, p=weights)
        texts.append(chars[idx].tobytes())
    index_q = _make_queries(rng, texts, spec.index_query_fraction, spec.max_gap, spec)
    test_q = _make_queries(rng, texts, spec.test_query_fraction, spec.max_gap, spec)
    workload = Workload.from_texts(texts, index_q)
    tests = [RegexQuery(i, p) for i, p in enumerate(test_q)]
    return workload, tests


def write_synthetic(spec: SyntheticSpec, out_dir) -> dict:
    """Write data.txt, queries.txt, test_queries.txt and spec.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    workload, tests = generate_synthetic(spec)
    paths = {
        "data": out / "data.txt",
        "queries": out / "queries.txt",
        "test_queries": out / "test_queries.txt",
        "spec": out / "spec.json",
    }
    write_workload(workload, paths["data"], paths["queries"])
    _write_lines(paths["test_queries"], [q.pattern for q in tests])
    paths["spec"].write_text(spec.to_json() + "\n")
    return paths
