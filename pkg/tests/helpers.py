"""Random workload generators and brute-force oracles shared by the tests.

The oracles deliberately avoid the package's fast paths: they scan records
with ``in``, enumerate gram sets with slicing and compare Python sets.
"""

from __future__ import annotations

import itertools
import re

import numpy as np

from gramdex.workload import Workload

ALPHABET = b"abcdefgh"


def random_text(rng, alphabet=ALPHABET, max_len=12, min_len=0) -> bytes:
    n = int(rng.integers(min_len, max_len + 1))
    return bytes(rng.choice(list(alphabet), size=n).tolist()) if n else b""


def random_pattern(rng, alphabet=ALPHABET, depth=0) -> bytes:
    """A pattern in the shared subset of Python ``re`` and the local parser."""
    parts = []
    for _ in range(int(rng.integers(1, 5))):
        parts.append(_random_atom(rng, alphabet, depth))
    return b"".join(parts)


def _random_atom(rng, alphabet, depth) -> bytes:
    roll = rng.random()
    if roll < 0.45:
        atom = bytes([int(rng.choice(list(alphabet)))]) * int(rng.integers(1, 3))
    elif roll < 0.55:
        atom = b"."
    elif roll < 0.65:
        members = bytes(sorted(set(rng.choice(list(alphabet), size=2).tolist())))
        atom = b"[" + (b"^" if rng.random() < 0.3 else b"") + members + b"]"
    elif roll < 0.8 and depth < 2:
        branches = [random_pattern(rng, alphabet, depth + 1) for _ in range(int(rng.integers(1, 4)))]
        atom = b"(" + b"|".join(branches) + b")"
    elif roll < 0.85:
        return b"^" if rng.random() < 0.5 else b"$"
    else:
        atom = bytes([int(rng.choice(list(alphabet)))])
    q = rng.random()
    if q < 0.1:
        atom += b"*"
    elif q < 0.2:
        atom += b"+"
    elif q < 0.3:
        atom += b"?"
    elif q < 0.4:
        lo = int(rng.integers(0, 3))
        atom += b"{%d,%d}" % (lo, lo + int(rng.integers(0, 3)))
    return atom


def random_workload(rng, n_records=None, n_queries=None, alphabet=ALPHABET, max_len=12) -> Workload:
    n_records = n_records or int(rng.integers(1, 51))
    n_queries = n_queries or int(rng.integers(1, 11))
    texts = [random_text(rng, alphabet, max_len) for _ in range(n_records)]
    queries = [random_pattern(rng, alphabet) for _ in range(n_queries)]
    return Workload.from_texts(texts, queries)


def sliced_workload(rng, n_records=20, n_queries=5, alphabet=b"abcd", max_len=10) -> Workload:
    """Queries are ``lit1.*lit2`` slices of records, so every literal occurs in D."""
    texts = [random_text(rng, alphabet, max_len, min_len=1) for _ in range(n_records)]
    queries = []
    for _ in range(n_queries):
        t = texts[int(rng.integers(0, n_records))]
        i = int(rng.integers(0, len(t)))
        j = int(rng.integers(i + 1, len(t) + 1))
        cut = int(rng.integers(i + 1, j + 1))
        queries.append(t[i:cut] + (b".*" + t[cut:j] if cut < j else b""))
    return Workload.from_texts(texts, queries)


# --------------------------------------------------------------------------
# oracles

def all_substrings(text: bytes, max_n: int) -> set:
    return {text[i:j] for i in range(len(text)) for j in range(i + 1, min(len(text), i + max_n) + 1)}


def support(texts, g: bytes) -> int:
    return sum(1 for t in texts if g in t)


def regex_matches(pattern: bytes, texts) -> list:
    rx = re.compile(pattern)
    return [i for i, t in enumerate(texts) if rx.search(t)]


def free_oracle(texts, c: float, max_n: int) -> set:
    """{g : sel(g) < c and every proper prefix has sel >= c}, by brute force."""
    n = len(texts)
    grams = set().union(*(all_substrings(t, max_n) for t in texts))
    useful = {g for g in grams if support(texts, g) / n < c}
    return {g for g in useful if all(g[:k] not in useful for k in range(1, len(g)))}


def pair_cover(g: bytes, gram_sets, texts) -> set:
    return {(q, d) for q, gs in enumerate(gram_sets) if g in gs
            for d, t in enumerate(texts) if g not in t}


def greedy_oracle(gram_sets, texts, candidates, max_keys) -> list:
    """Exhaustive greedy over explicit pair sets with the documented tie-break."""
    from fractions import Fraction
    covered: set = set()
    chosen: list = []
    left = set(candidates)
    while left and len(chosen) < max_keys:
        best = None
        for g in left:
            b = len(pair_cover(g, gram_sets, texts) - covered)
            cost = max(support(texts, g), 1)
            key = (-Fraction(b, cost), -b, cost, len(g), g)
            if b > 0 and (best is None or key < best[0]):
                best = (key, g)
        if best is None:
            break
        g = best[1]
        chosen.append(g)
        covered |= pair_cover(g, gram_sets, texts)
        left.discard(g)
    return chosen


def lp_vertex_oracle(cv, A, b):
    """min cv.x, A x >= b, 0 <= x <= 1 by enumerating every vertex.

    A vertex is fixed by n tight constraints drawn from the rows and the
    bounds; each candidate basis is solved and kept if feasible.
    """
    cv = np.asarray(cv, float)
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    m, n = A.shape
    rows = [(A[i], b[i]) for i in range(m)]
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1
        rows.append((e, 0.0))
        rows.append((e, 1.0))
    best = None
    for combo in itertools.combinations(range(len(rows)), n):
        M = np.array([rows[k][0] for k in combo])
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, np.array([rows[k][1] for k in combo]))
        if np.any(x < -1e-9) or np.any(x > 1 + 1e-9):
            continue
        if m and np.any(A @ x < b - 1e-9):
            continue
        val = float(cv @ x)
        if best is None or val < best:
            best = val
    return best
