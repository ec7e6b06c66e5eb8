"""Inverted index over selected n-grams and AND/OR index search plans."""

from __future__ import annotations

import io
import struct
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np

from .gram import MAX_CODE_LEN, decode, encode
from .regex_literal import And, Lit, LiteralTree, escape_bytes
from .workload import Workload

__all__ = [
    "InvertedIndex",
    "build_index",
    "PlanAnd",
    "PlanOr",
    "Key",
    "ALL",
    "PlanTree",
    "compile_plan",
    "evaluate_plan",
    "plan_to_sexpr",
    "dump_index",
    "load_index",
    "SnapshotError",
]

ID_WIDTH = 4
HEADER_BYTES = 16
KEY_OVERHEAD = 8
MAGIC = b"GRDXIDX1"
_ID_DTYPE = np.uint32


class SnapshotError(ValueError):
    pass


class InvertedIndex:
    """Selected n-grams mapped to sorted, duplicate-free record-id arrays.

    Keys keep their insertion (selection) order, which is also the snapshot
    order.
    """

    def __init__(self, postings: dict, record_count: int):
        self.postings = postings
        self.record_count = record_count
        self._max_key = max((len(k) for k in postings), default=0)

    @property
    def keys(self) -> list:
        return list(self.postings)

    @property
    def key_count(self) -> int:
        return len(self.postings)

    @property
    def total_posting_entries(self) -> int:
        return int(sum(len(p) for p in self.postings.values()))

    @property
    def byte_size(self) -> int:
        """Header, then per key: length fields, key bytes and 32-bit ids."""
        key_bytes = sum(len(k) for k in self.postings)
        return (HEADER_BYTES + key_bytes + KEY_OVERHEAD * self.key_count
                + ID_WIDTH * self.total_posting_entries)

    def __contains__(self, key: bytes) -> bool:
        return key in self.postings

    def keys_in(self, literal: bytes) -> list:
        """Index keys occurring in ``literal``, ordered by first position then length."""
        found = {}
        size = len(literal)
        for n in range(min(self._max_key, size), 0, -1):
            for i in range(size - n + 1):
                w = literal[i:i + n]
                if w in self.postings and w not in found:
                    found[w] = literal.find(w)
        return sorted(found, key=lambda k: (found[k], -len(k), k))

    def __eq__(self, other) -> bool:
        if not isinstance(other, InvertedIndex):
            return NotImplemented
        return (self.record_count == other.record_count
                and list(self.postings) == list(other.postings)
                and all(np.array_equal(self.postings[k], other.postings[k]) for k in self.postings))


def build_index(workload: Workload, grams: Iterable[bytes]) -> InvertedIndex:
    grams = list(getattr(grams, "grams", grams))
    if len(set(grams)) != len(grams):
        raise ValueError("index keys must be distinct")
    by_len: dict = defaultdict(set)
    for g in grams:
        by_len[len(g)].add(g)
    found: dict = {}
    slow = {n: keys for n, keys in by_len.items() if n > MAX_CODE_LEN}
    for n, keys in by_len.items():
        if n in slow:
            continue
        keep = np.fromiter((encode(g) for g in keys), dtype=np.uint64, count=len(keys))
        code, rid = workload.window_table.pairs(n, keep=keep)
        cuts = np.flatnonzero(code[1:] != code[:-1]) + 1
        for chunk_code, chunk in zip(code[np.r_[0, cuts]].tolist() if len(code) else [],
                                     np.split(rid, cuts)):
            found[decode(chunk_code, n)] = chunk.astype(_ID_DTYPE)
    if slow:
        hits: dict = {g: [] for keys in slow.values() for g in keys}
        for rid, text in enumerate(workload.texts):
            size = len(text)
            for n, keys in slow.items():
                if n > size:
                    continue
                windows = {text[i:i + n] for i in range(size - n + 1)}
                for g in (windows & keys):
                    hits[g].append(rid)
        found.update({g: np.asarray(ids, dtype=_ID_DTYPE) for g, ids in hits.items()})
    empty = np.zeros(0, dtype=_ID_DTYPE)
    postings = {g: found.get(g, empty) for g in grams}
    return InvertedIndex(postings, workload.record_count)


# --------------------------------------------------------------------------
# Plans

@dataclass(frozen=True)
class Key:
    gram: bytes


@dataclass(frozen=True)
class PlanAnd:
    children: tuple


@dataclass(frozen=True)
class PlanOr:
    children: tuple


class _All:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ALL"


ALL = _All()
PlanTree = Union[Key, PlanAnd, PlanOr, _All]


def _dominant(keys: list) -> list:
    """Drop every key that is a substring of another kept key."""
    kept: list = []
    for k in sorted(keys, key=len, reverse=True):
        if not any(k in other for other in kept):
            kept.append(k)
    order = {k: i for i, k in enumerate(keys)}
    return sorted(kept, key=order.__getitem__)


def _compile(node: LiteralTree, index: InvertedIndex) -> PlanTree:
    if isinstance(node, Lit):
        keys = _dominant(index.keys_in(node.data))
        if not keys:
            return ALL
        if len(keys) == 1:
            return Key(keys[0])
        return PlanAnd(tuple(Key(k) for k in keys))
    children = [_compile(c, index) for c in node.children]
    if isinstance(node, And):
        kept = [c for c in children if c is not ALL]
        if not kept:
            return ALL
        return kept[0] if len(kept) == 1 else PlanAnd(tuple(kept))
    if any(c is ALL for c in children):
        return ALL
    return children[0] if len(children) == 1 else PlanOr(tuple(children))


def compile_plan(tree: Optional[LiteralTree], index: InvertedIndex) -> PlanTree:
    """Replace literals by the index keys they contain; unindexed parts become ALL."""
    if tree is None:
        return ALL
    return _compile(tree, index)


def evaluate_plan(plan: PlanTree, index: InvertedIndex, record_count: int) -> np.ndarray:
    """Candidate record ids for ``plan``, sorted ascending."""
    if plan is ALL:
        return np.arange(record_count, dtype=_ID_DTYPE)
    if isinstance(plan, Key):
        return index.postings[plan.gram]
    parts = [evaluate_plan(c, index, record_count) for c in plan.children]
    if isinstance(plan, PlanAnd):
        parts.sort(key=len)
        acc = parts[0]
        for p in parts[1:]:
            if not len(acc):
                break
            acc = np.intersect1d(acc, p, assume_unique=True)
        return acc
    return np.unique(np.concatenate(parts)).astype(_ID_DTYPE, copy=False)


def plan_to_sexpr(plan: PlanTree) -> str:
    if plan is ALL:
        return "all"
    if isinstance(plan, Key):
        return '(key "' + escape_bytes(plan.gram).replace('"', '\\"') + '")'
    tag = "and" if isinstance(plan, PlanAnd) else "or"
    return f"({tag} " + " ".join(plan_to_sexpr(c) for c in plan.children) + ")"


# --------------------------------------------------------------------------
# Snapshots: MAGIC, u32 record count, u32 key count, then per key
# u32 key length, key bytes, u32 posting length, LEB128 id deltas.

def _varint(value: int, out: bytearray) -> None:
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return


def dump_index(index: InvertedIndex) -> bytes:
    out = bytearray(MAGIC)
    out += struct.pack("<II", index.record_count, index.key_count)
    for key, posting in index.postings.items():
        out += struct.pack("<I", len(key))
        out += key
        out += struct.pack("<I", len(posting))
        prev = 0
        for rid in posting.tolist():
            _varint(rid - prev, out)
            prev = rid
    return bytes(out)


def load_index(data: bytes) -> InvertedIndex:
    buf = io.BytesIO(data)

    def read(n: int) -> bytes:
        chunk = buf.read(n)
        if len(chunk) != n:
            raise SnapshotError("truncated index snapshot")
        return chunk

    if read(len(MAGIC)) != MAGIC:
        raise SnapshotError("not an index snapshot (bad magic)")
    record_count, key_count = struct.unpack("<II", read(8))
    postings = {}
    for _ in range(key_count):
        (klen,) = struct.unpack("<I", read(4))
        key = read(klen)
        (plen,) = struct.unpack("<I", read(4))
        ids = []
        prev = 0
        for _ in range(plen):
            shift = value = 0
            while True:
                byte = read(1)[0]
                value |= (byte & 0x7F) << shift
                shift += 7
                if not byte & 0x80:
                    break
            prev += value
            ids.append(prev)
        if key in postings:
            raise SnapshotError(f"duplicate key {key!r}")
        postings[key] = np.asarray(ids, dtype=_ID_DTYPE)
    if buf.read(1):
        raise SnapshotError("trailing bytes after index snapshot")
    return InvertedIndex(postings, record_count)
