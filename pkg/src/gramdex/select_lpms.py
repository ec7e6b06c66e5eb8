"""Per-length LP-relaxation selection over query-literal n-grams.

Iteration ``i`` considers the length-``i`` grams of the query literals whose
length ``i-1`` prefix was a candidate but was not selected. For those it
minimizes total coverage ``sum cv(g) x_g`` subject to one row per query:
the postings of the chosen grams in that query must add up to at least the
smallest posting among the query's candidates. The relaxed solution is
rounded to a 0/1 set and the unselected grams are extended.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .gram import GramStats, compute_stats, query_grams
from .selection import Deadline, SelectionResult
from .simplex import OPTIMAL, solve_bounded
from .regex_literal import escape_bytes
from .workload import Workload

__all__ = [
    "LpmsConfig",
    "LpProblem",
    "LpSolution",
    "coverage",
    "build_lp",
    "solve_lp",
    "round_solution",
    "select_lpms",
    "write_lp",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LpmsConfig:
    mode: str = "deterministic"
    max_n: int = 10
    max_keys: Optional[int] = None
    round_threshold: float = 0.5
    random_trials: int = 16
    seed: int = 0
    lp_tolerance: float = 1e-7

    def __post_init__(self):
        if self.mode not in ("deterministic", "randomized"):
            raise ValueError(f"mode must be deterministic or randomized, got {self.mode!r}")
        if not 0 < self.round_threshold <= 1:
            raise ValueError("round_threshold must be in (0, 1]")
        if self.random_trials < 1 or self.max_n < 1:
            raise ValueError("random_trials and max_n must be >= 1")


@dataclass
class LpProblem:
    grams: list
    cv: np.ndarray
    A: np.ndarray
    b: np.ndarray
    query_ids: list = field(default_factory=list)  # row -> query id

    @property
    def empty(self) -> bool:
        return not self.grams


@dataclass
class LpSolution:
    x: np.ndarray
    objective: float
    status: str


def coverage(g: bytes, stats: GramStats) -> float:
    """cv(g) = s_D(g) / (|g| * s_Q(g))."""
    s_q = stats.s_Q.get(g, 0)
    if s_q < 1:
        raise ValueError(f"coverage undefined for {g!r}: not in any query")
    return stats.s_D.get(g, 0) / (len(g) * s_q)


def build_lp(workload: Workload, stats: GramStats, candidates, gram_sets=None) -> LpProblem:
    """Constraint matrix and coverage vector for one iteration.

    Rows whose query contains none of ``candidates`` are dropped.
    """
    grams = sorted(set(candidates))
    if gram_sets is None:
        gram_sets = [query_grams(q.literals) for q in workload.queries]
    col = {g: j for j, g in enumerate(grams)}
    support = np.array([stats.s_D.get(g, 0) for g in grams], dtype=float)
    rows, b, qids = [], [], []
    for qi, qs in enumerate(gram_sets):
        cols = [col[g] for g in qs if g in col]
        if not cols:
            continue
        row = np.zeros(len(grams))
        row[cols] = support[cols]
        rows.append(row)
        b.append(support[cols].min())
        qids.append(qi)
    cv = np.array([coverage(g, stats) for g in grams], dtype=float)
    A = np.array(rows, dtype=float).reshape(len(rows), len(grams))
    return LpProblem(grams, cv, A, np.array(b, dtype=float), qids)


def solve_lp(p: LpProblem, eps: float = 1e-7) -> LpSolution:
    """min cv.x s.t. A x >= b, 0 <= x <= 1 (duplicate rows solved once)."""
    if len(p.b):
        assert np.all(p.A.max(axis=1) >= p.b - eps), "row cannot reach its own minimum support"
        packed = np.unique(np.column_stack([p.A, p.b]), axis=0)
        A, b = packed[:, :-1], packed[:, -1]
    else:
        A, b = p.A, p.b
    res = solve_bounded(p.cv, A, b, eps=eps)
    if res.status == OPTIMAL and len(b):
        slack = A @ res.x - b
        if slack.min() < -1e3 * eps * max(1.0, float(np.abs(b).max())):
            raise ArithmeticError(f"simplex returned an infeasible point (slack {slack.min()})")
    return LpSolution(res.x, res.objective, res.status)


def _repair(selected: np.ndarray, x: np.ndarray, p: LpProblem) -> np.ndarray:
    selected = selected.copy()
    for r in range(len(p.b)):
        row = p.A[r]
        while row @ selected < p.b[r]:
            options = np.flatnonzero((row > 0) & ~selected)
            if options.size == 0:
                break
            # highest fractional value first, lowest column on ties
            pick = options[np.lexsort((options, -x[options]))[0]]
            selected[pick] = True
    return selected


def round_solution(sol: LpSolution, cfg: LpmsConfig, p: LpProblem) -> list:
    """Round the relaxed ``x`` to selected column indices satisfying ``A 1_S >= b``."""
    x = np.clip(sol.x, 0.0, 1.0)
    if cfg.mode == "deterministic":
        chosen = _repair(x >= cfg.round_threshold - 1e-12, x, p)
        return np.flatnonzero(chosen).tolist()
    rng = np.random.default_rng(cfg.seed)
    best, best_cost = None, np.inf
    for _ in range(cfg.random_trials):
        trial = _repair(rng.random(len(x)) < x, x, p)
        cost = float(p.cv[trial].sum())
        if cost < best_cost:
            best, best_cost = trial, cost
    return np.flatnonzero(best).tolist()


def write_lp(p: LpProblem, path) -> None:
    """Write the problem in CPLEX LP text format."""
    names = [f"x{j}" for j in range(len(p.grams))]
    lines = ["\\ columns: " + " ".join(f"{n}={escape_bytes(g)!r}" for n, g in zip(names, p.grams)),
             "Minimize", " obj: " + (" + ".join(f"{c:.12g} {n}" for c, n in zip(p.cv, names)) or "0"),
             "Subject To"]
    for r in range(len(p.b)):
        terms = [f"{p.A[r, j]:.12g} {names[j]}" for j in np.flatnonzero(p.A[r])]
        lines.append(f" q{p.query_ids[r]}_{r}: " + " + ".join(terms) + f" >= {p.b[r]:.12g}")
    lines.append("Bounds")
    lines.extend(f" 0 <= {n} <= 1" for n in names)
    lines.append("End")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def select_lpms(workload: Workload, cfg: LpmsConfig, deadline: Optional[Deadline] = None,
                lp_dump_dir=None, audit: Optional[list] = None) -> SelectionResult:
    """``audit``, when given, collects ``(problem, solution, chosen)`` per iteration."""
    result = SelectionResult(method="LPMS-D" if cfg.mode == "deterministic" else "LPMS-R")
    if not workload.queries:
        raise ValueError("LPMS needs at least one query")
    budget = cfg.max_keys
    if budget == 0:
        result.stopped_early = True
        return result
    lits = [q.literals for q in workload.queries]
    gram_sets = [query_grams(ls, cfg.max_n) for ls in lits]
    pool = set().union(*gram_sets)
    if not pool:
        msg = "LPMS: no query has a required literal"
        log.warning(msg)
        result.warnings.append(msg)
        return result
    stats = compute_stats(workload, pool)
    candidates = {g for g in pool if len(g) == 1}
    for n in range(1, cfg.max_n + 1):
        if not candidates:
            break
        if deadline is not None and deadline.expired():
            result.timed_out = True
            break
        problem = build_lp(workload, stats, candidates, gram_sets)
        sol = solve_lp(problem, cfg.lp_tolerance)
        if sol.status != OPTIMAL:
            raise ArithmeticError(f"LP at length {n} ended with status {sol.status}")
        chosen = round_solution(sol, cfg, problem)
        if audit is not None:
            audit.append((problem, sol, chosen))
        if lp_dump_dir is not None:
            write_lp(problem, f"{lp_dump_dir}/lpms_iter{n}.lp")
        picked = [problem.grams[j] for j in chosen]
        if budget is not None and len(result.grams) + len(picked) > budget:
            picked.sort(key=lambda g: (coverage(g, stats), g))
            picked = picked[:budget - len(result.grams)]
            result.stopped_early = True
        result.grams.extend(picked)
        result.per_iteration.append((len(problem.grams), len(picked)))
        if result.stopped_early or (budget is not None and len(result.grams) >= budget):
            break
        rest = candidates - set(picked)
        candidates = {g for g in pool if len(g) == n + 1 and g[:-1] in rest}
    if not result.grams:
        msg = "LPMS selected no n-grams"
        log.warning(msg)
        result.warnings.append(msg)
    return result
