"""Dense bounded-variable primal simplex (two phases).

Nonbasic variables sit at one of their bounds; basic values are kept
explicitly and the tableau ``B^-1 A`` is refactored from scratch every
``REFACTOR_EVERY`` pivots and before optimality is declared. Pricing is
Dantzig's rule, falling back to Bland's rule after a run of degenerate pivots.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import Infeasible, IterationLimit, Unbounded

PIVOT_TOL = 1e-9
OPT_TOL = 1e-10
FEAS_TOL = 1e-8
REFACTOR_EVERY = 60
DEGENERATE_RUN = 40


@dataclass
class LpResult:
    x: np.ndarray
    objective: float
    iterations: int
    duals: np.ndarray


def simplex(c, A, senses: Sequence[str], b, lb, ub, max_iter: Optional[int] = None) -> LpResult:
    """Minimize ``c @ x`` subject to ``A x (<=|=|>=) b`` and ``lb <= x <= ub``.

    Lower bounds must be finite; upper bounds may be ``inf``.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, c.size)
    b = np.asarray(b, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    m, n = A.shape
    if np.any(~np.isfinite(lb)):
        raise ValueError("lower bounds must be finite")
    if np.any(lb > ub + 1e-12):
        raise Infeasible("variable bounds are inconsistent")
    if m == 0:
        x = np.where(c >= 0, lb, ub)
        if np.any(~np.isfinite(x)):
            raise Unbounded("objective unbounded below")
        return LpResult(x, float(c @ x), 0, np.zeros(0))

    # slack columns, then artificials only for rows the slack cannot start
    resid = b - A @ lb
    cols, col_lb, col_ub = [A], [lb], [ub]
    basis = np.full(m, -1)
    start = np.zeros(m)
    n_slack = 0
    slack_block = []
    for i, s in enumerate(senses):
        if s in ("<=", "L"):
            sign = 1.0
        elif s in (">=", "G"):
            sign = -1.0
        elif s in ("=", "E"):
            continue
        else:
            raise ValueError(f"bad sense {s!r}")
        col = np.zeros(m)
        col[i] = sign
        slack_block.append(col)
        if resid[i] * sign >= 0:
            basis[i] = n + n_slack
            start[i] = resid[i] * sign
        n_slack += 1
    if n_slack:
        cols.append(np.array(slack_block).T)
        col_lb.append(np.zeros(n_slack))
        col_ub.append(np.full(n_slack, np.inf))
    need = np.flatnonzero(basis < 0)
    n_art = need.size
    if n_art:
        art = np.zeros((m, n_art))
        art[need, np.arange(n_art)] = np.where(resid[need] >= 0, 1.0, -1.0)
        cols.append(art)
        col_lb.append(np.zeros(n_art))
        col_ub.append(np.full(n_art, np.inf))
        basis[need] = n + n_slack + np.arange(n_art)
        start[need] = np.abs(resid[need])
    Af = np.hstack(cols)
    L = np.concatenate(col_lb)
    U = np.concatenate(col_ub)
    N = Af.shape[1]
    x = L.copy()
    x[basis] = start
    art_start = n + n_slack

    tab = _Tableau(Af, b, L, U, x, basis)
    limit = max_iter or 50 * (m + N) + 1000
    iters = 0
    if n_art:
        c1 = np.zeros(N)
        c1[art_start:] = 1.0
        iters = tab.run(c1, limit, frozen=None)
        infeas = float(tab.x[art_start:].sum())
        if infeas > FEAS_TOL * max(1.0, float(np.abs(b).max())):
            raise Infeasible(f"phase 1 ended with infeasibility {infeas:.3g}")
        tab.U[art_start:] = 0.0
        tab.x[art_start:] = 0.0
        tab.drive_out(art_start)
    c2 = np.zeros(N)
    c2[:n] = c
    frozen = np.zeros(N, dtype=bool)
    frozen[art_start:] = True
    iters += tab.run(c2, limit - iters, frozen=frozen)
    xs = tab.x[:n].copy()
    xs = np.clip(xs, lb, ub)
    duals = tab.duals(c2)
    return LpResult(xs, float(c @ xs), iters, duals)


class _Tableau:
    def __init__(self, Af, b, L, U, x, basis):
        self.A = Af
        self.b = b
        self.L = L
        self.U = U
        self.x = x
        self.basis = basis.copy()
        self.refactor()

    def refactor(self):
        B = self.A[:, self.basis]
        self.T = np.linalg.solve(B, self.A)
        nonbasic = np.ones(self.A.shape[1], dtype=bool)
        nonbasic[self.basis] = False
        rhs = self.b - self.A[:, nonbasic] @ self.x[nonbasic]
        xb = np.linalg.solve(B, rhs)
        lo, hi = self.L[self.basis], self.U[self.basis]
        self.x[self.basis] = np.clip(xb, lo, hi)

    def duals(self, c):
        B = self.A[:, self.basis]
        return np.linalg.solve(B.T, c[self.basis])

    def reduced(self, c):
        return c - c[self.basis] @ self.T

    def run(self, c, limit, frozen):
        m, N = self.T.shape
        d = self.reduced(c)
        iters = since_refactor = degenerate = 0
        bland = False
        is_basic = np.zeros(N, dtype=bool)
        is_basic[self.basis] = True
        while True:
            at_lower = self.x <= self.L + 1e-12
            at_upper = self.x >= self.U - 1e-12
            movable = ~is_basic & (self.U > self.L)
            if frozen is not None:
                movable &= ~frozen
            score = np.where(movable & at_lower & (d < -OPT_TOL), -d, 0.0)
            score = np.maximum(score, np.where(movable & at_upper & ~at_lower & (d > OPT_TOL), d, 0.0))
            if not score.any():
                # confirm against a fresh factorization before declaring optimal
                if since_refactor == 0:
                    return iters
                self.refactor()
                d = self.reduced(c)
                since_refactor = 0
                continue
            j = int(np.flatnonzero(score)[0]) if bland else int(np.argmax(score))
            delta = 1.0 if (at_lower[j] and d[j] < 0) else -1.0
            alpha = delta * self.T[:, j]
            xb = self.x[self.basis]
            lo, hi = self.L[self.basis], self.U[self.basis]
            ratios = np.full(m, np.inf)
            pos = alpha > PIVOT_TOL
            neg = alpha < -PIVOT_TOL
            ratios[pos] = (xb[pos] - lo[pos]) / alpha[pos]
            ratios[neg] = (hi[neg] - xb[neg]) / (-alpha[neg])
            ratios = np.maximum(ratios, 0.0)
            t_flip = self.U[j] - self.L[j]
            r = -1
            t = t_flip
            if ratios.size and ratios.min() < t_flip:
                tmin = ratios.min()
                ties = np.flatnonzero(ratios <= tmin + 1e-12)
                if bland:
                    r = int(ties[np.argmin(self.basis[ties])])
                else:
                    r = int(ties[np.argmax(np.abs(alpha[ties]))])
                t = ratios[r]
            if not np.isfinite(t):
                raise Unbounded("objective unbounded below")
            iters += 1
            if iters > limit:
                raise IterationLimit(f"simplex exceeded {limit} iterations")
            self.x[j] += delta * t
            self.x[self.basis] = xb - t * alpha
            if t <= 1e-12:
                degenerate += 1
                if degenerate >= DEGENERATE_RUN:
                    bland = True
            else:
                degenerate = 0
                bland = False
            if r < 0:
                # bound flip, basis unchanged
                self.x[j] = self.U[j] if delta > 0 else self.L[j]
                continue
            leaving = self.basis[r]
            self.x[leaving] = self.L[leaving] if alpha[r] > 0 else self.U[leaving]
            self.pivot(r, j)
            d = d - d[j] * self.T[r]
            is_basic[leaving] = False
            is_basic[j] = True
            since_refactor += 1
            if since_refactor >= REFACTOR_EVERY:
                self.refactor()
                d = self.reduced(c)
                since_refactor = 0

    def pivot(self, r, j):
        piv = self.T[r, j]
        self.T[r] /= piv
        col = self.T[:, j].copy()
        col[r] = 0.0
        self.T -= np.outer(col, self.T[r])
        self.basis[r] = j

    def drive_out(self, art_start):
        """Pivot zero-valued artificials out of the basis where possible."""
        for r in range(len(self.basis)):
            if self.basis[r] < art_start:
                continue
            row = np.abs(self.T[r, :art_start])
            row[self.basis[self.basis < art_start]] = 0.0
            if not row.size:
                continue
            j = int(np.argmax(row))
            if row[j] < 1e-7:
                continue
            self.pivot(r, j)
        self.refactor()
