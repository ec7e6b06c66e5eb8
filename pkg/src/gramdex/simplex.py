"""Dense bounded-variable primal simplex.

Solves::

    minimize    c @ x
    subject to  A @ x >= b
                lo <= x <= hi

Each row gets a surplus variable ``s >= 0`` (``A x - s = b``). Nonbasic
variables sit at either bound, so box constraints never enter the basis.
The start puts every structural variable at its upper bound when finite;
rows that start violated get an artificial variable and a phase-one
objective. Pricing is Dantzig's rule, falling back to Bland's rule after a
run of degenerate pivots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LpResult", "solve_bounded"]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ITERATION_LIMIT = "iteration-limit"
UNBOUNDED = "unbounded"


@dataclass
class LpResult:
    x: np.ndarray
    objective: float
    status: str
    iterations: int


class _Tableau:
    def __init__(self, A: np.ndarray, b: np.ndarray, lo: np.ndarray, hi: np.ndarray, eps: float):
        m, n = A.shape
        self.m, self.n, self.eps = m, n, eps
        x0 = np.where(np.isfinite(hi), hi, lo)
        resid = b - A @ x0
        need_art = resid > eps
        n_art = int(need_art.sum())
        # columns: structural | surplus | artificial
        cols = np.zeros((m, n + m + n_art))
        cols[:, :n] = A
        cols[:, n:n + m] = -np.eye(m)
        art_rows = np.flatnonzero(need_art)
        for k, r in enumerate(art_rows):
            cols[r, n + m + k] = 1.0
        self.lo = np.concatenate([lo, np.zeros(m), np.zeros(n_art)])
        self.hi = np.concatenate([hi, np.full(m, np.inf), np.full(n_art, np.inf)])
        self.value = np.concatenate([x0, np.zeros(m + n_art)])
        self.basis = np.empty(m, dtype=int)
        for r in range(m):
            if need_art[r]:
                self.basis[r] = n + m + int(np.searchsorted(art_rows, r))
            else:
                self.basis[r] = n + r
        self.n_art = n_art
        self.art_start = n + m
        # tableau rows are B^-1 @ cols; B is diagonal +-1 at the start
        diag = np.array([cols[r, self.basis[r]] for r in range(m)])
        self.T = cols / diag[:, None]
        self.value[self.basis] = 0.0
        nonbasic_part = cols @ self.value
        self.value[self.basis] = (b - nonbasic_part) / diag
        self.is_basic = np.zeros(cols.shape[1], dtype=bool)
        self.is_basic[self.basis] = True
        self.cols, self.b = cols, b

    def refresh(self) -> None:
        """Refactor from the original columns to shed accumulated round-off."""
        if not self.m:
            return
        B = self.cols[:, self.basis]
        self.T = np.linalg.solve(B, self.cols)
        nb = self.value.copy()
        nb[self.basis] = 0.0
        self.value[self.basis] = np.linalg.solve(B, self.b - self.cols @ nb)

    def run(self, cost: np.ndarray, max_iter: int) -> tuple:
        eps = self.eps
        degenerate = 0
        for it in range(max_iter):
            cb = cost[self.basis]
            reduced = cost - cb @ self.T
            at_lo = np.isclose(self.value, self.lo, atol=eps, rtol=0)
            at_hi = np.isclose(self.value, self.hi, atol=eps, rtol=0)
            fixed = self.hi - self.lo <= eps
            can_up = (~self.is_basic) & (~fixed) & at_lo & (reduced < -eps)
            can_down = (~self.is_basic) & (~fixed) & at_hi & ~at_lo & (reduced > eps)
            eligible = np.flatnonzero(can_up | can_down)
            if eligible.size == 0:
                return OPTIMAL, it
            bland = degenerate > 50
            if bland:
                j = int(eligible[0])
            else:
                j = int(eligible[np.argmax(np.abs(reduced[eligible]))])
            sigma = 1.0 if can_up[j] else -1.0
            alpha = self.T[:, j]
            rate = sigma * alpha
            step = self.hi[j] - self.lo[j]
            leave = -1
            leave_to_hi = False
            xb = self.value[self.basis]
            lo_b, hi_b = self.lo[self.basis], self.hi[self.basis]
            lims = np.full(self.m, np.inf)
            to_hi = np.zeros(self.m, dtype=bool)
            dec = rate > eps
            lims[dec] = (xb[dec] - lo_b[dec]) / rate[dec]
            inc = (rate < -eps) & np.isfinite(hi_b)
            lims[inc] = (hi_b[inc] - xb[inc]) / -rate[inc]
            to_hi[inc] = True
            np.maximum(lims, 0.0, out=lims)
            if self.m and lims.min() < step - eps:
                step = float(lims.min())
                ties = np.flatnonzero(lims <= step + eps)
                if bland:
                    leave = int(ties[np.argmin(self.basis[ties])])
                else:
                    leave = int(ties[np.argmax(np.abs(alpha[ties]))])
                leave_to_hi = bool(to_hi[leave])
            if not np.isfinite(step):
                return UNBOUNDED, it
            degenerate = degenerate + 1 if step <= eps else 0
            self.value[self.basis] = xb - sigma * step * alpha
            self.value[j] += sigma * step
            if leave < 0:
                # bound flip: the entering variable crossed its whole range
                self.value[j] = self.hi[j] if sigma > 0 else self.lo[j]
                continue
            out = self.basis[leave]
            self.value[out] = self.hi[out] if leave_to_hi else self.lo[out]
            piv = self.T[leave, j]
            self.T[leave] /= piv
            col = self.T[:, j].copy()
            col[leave] = 0.0
            self.T -= np.outer(col, self.T[leave])
            self.basis[leave] = j
            self.is_basic[out] = False
            self.is_basic[j] = True
        return ITERATION_LIMIT, max_iter


def solve_bounded(c, A, b, lo=None, hi=None, eps: float = 1e-7, max_iter: int = 10000) -> LpResult:
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    n = len(c)
    if A.size == 0:
        A = np.zeros((0, n))
    lo = np.zeros(n) if lo is None else np.asarray(lo, dtype=float)
    hi = np.ones(n) if hi is None else np.asarray(hi, dtype=float)
    tab = _Tableau(A, b, lo, hi, eps)
    total = 0
    if tab.n_art:
        phase1 = np.zeros(len(tab.value))
        phase1[tab.art_start:] = 1.0
        status, its = tab.run(phase1, max_iter)
        total += its
        tab.refresh()
        if status == ITERATION_LIMIT:
            return LpResult(tab.value[:n].copy(), float("nan"), status, total)
        if tab.value[tab.art_start:].sum() > eps * max(1.0, np.abs(b).max(initial=0.0)):
            return LpResult(tab.value[:n].copy(), float("nan"), INFEASIBLE, total)
        # pin artificials at zero for phase two
        tab.hi[tab.art_start:] = 0.0
        tab.value[tab.art_start:] = np.clip(tab.value[tab.art_start:], 0.0, 0.0)
    cost = np.zeros(len(tab.value))
    cost[:n] = c
    status, its = tab.run(cost, max_iter - total)
    total += its
    tab.refresh()
    x = np.clip(tab.value[:n], lo, hi)
    return LpResult(x, float(c @ x), status, total)
