"""Dense two-phase tableau simplex.

Pivoting uses Dantzig's rule and switches to Bland's rule after a
degenerate pivot, which rules out cycling.
"""

from __future__ import annotations

import numpy as np

from .problem import EQ, GE, LE, LinearProgram, SolveReport, Status

PIVOT_TOL = 1e-9


class _Tableau:
    def __init__(self, A, b, basis):
        m, n = A.shape
        self.T = np.zeros((m + 1, n + 1))
        self.T[:m, :n] = A
        self.T[:m, n] = b
        self.basis = list(basis)
        self.m, self.n = m, n
        self.pivots = 0

    def set_objective(self, c):
        self.T[self.m, :self.n] = c
        self.T[self.m, self.n] = 0.0
        for r, j in enumerate(self.basis):
            if self.T[self.m, j] != 0.0:
                self.T[self.m] -= self.T[self.m, j] * self.T[r]

    def pivot(self, r, e):
        T = self.T
        T[r] /= T[r, e]
        col = T[:, e].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.basis[r] = e
        self.pivots += 1

    def run(self, allowed, tol, max_pivots):
        """Maximize the current objective row. Returns a Status."""
        T, m, n = self.T, self.m, self.n
        bland = False
        while True:
            if self.pivots >= max_pivots:
                return Status.LIMIT
            red = np.where(allowed, T[m, :n], 0.0)
            if bland:
                cands = np.flatnonzero(red > tol)
                if cands.size == 0:
                    return Status.OPTIMAL
                e = int(cands[0])
            else:
                e = int(np.argmax(red))
                if red[e] <= tol:
                    return Status.OPTIMAL
            col = T[:m, e]
            rows = np.flatnonzero(col > PIVOT_TOL)
            if rows.size == 0:
                return Status.UNBOUNDED
            ratios = T[rows, n] / col[rows]
            best = ratios.min()
            ties = rows[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
            # Bland: leave on the smallest basic variable index among ties.
            r = int(min(ties, key=lambda i: self.basis[i]))
            degenerate = T[r, n] <= PIVOT_TOL
            self.pivot(r, e)
            bland = bland or degenerate


def _standard_form(lp: LinearProgram):
    """Map ``lp`` to ``max c'y, A'y (senses) b', y >= 0``.

    Returns the pieces plus a recovery map ``x = offset + R @ y[:k]``.
    """
    n = lp.n_vars
    cols = []      # (original var, sign)
    offset = np.zeros(n)
    extra_rows = []  # (std col, ub) pairs: y_col <= ub
    for j in range(n):
        lo, hi = lp.lower[j], lp.upper[j]
        if np.isfinite(lo):
            offset[j] = lo
            cols.append((j, 1.0))
            if np.isfinite(hi):
                extra_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            offset[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    k = len(cols)
    R = np.zeros((n, k))
    for t, (j, s) in enumerate(cols):
        R[j, t] = s
    A1 = lp.A @ R
    b1 = lp.rhs - lp.A @ offset
    c1 = lp.c @ R
    E = np.zeros((len(extra_rows), k))
    eb = np.zeros(len(extra_rows))
    for i, (t, ub) in enumerate(extra_rows):
        E[i, t] = 1.0
        eb[i] = ub
    A2 = np.vstack([A1, E])
    b2 = np.concatenate([b1, eb])
    senses = np.concatenate([lp.senses, np.full(len(extra_rows), LE, dtype=object)])
    return A2, b2, senses, c1, R, offset


def simplex(lp: LinearProgram, tol: float = 1e-7, max_pivots: int = 50_000) -> SolveReport:
    """Solve ``lp`` exactly up to ``tol``; reports infeasible/unbounded as status."""
    A, b, senses, c, R, offset = _standard_form(lp)
    m, k = A.shape
    n_orig_rows = lp.n_rows
    flip = np.where(b < 0, -1.0, 1.0)
    A = A * flip[:, None]
    b = b * flip
    senses = senses.copy()
    for i in range(m):
        if flip[i] < 0 and senses[i] != EQ:
            senses[i] = GE if senses[i] == LE else LE

    n_slack = int(np.sum(senses != EQ))
    n_art = int(np.sum(senses != LE))
    width = k + n_slack + n_art
    full = np.zeros((m, width))
    full[:, :k] = A
    basis = [0] * m
    s_col, a_col = k, k + n_slack
    art_cols = []
    for i in range(m):
        if senses[i] == LE:
            full[i, s_col] = 1.0
            basis[i] = s_col
            s_col += 1
        elif senses[i] == GE:
            full[i, s_col] = -1.0
            s_col += 1
            full[i, a_col] = 1.0
            basis[i] = a_col
            art_cols.append(a_col)
            a_col += 1
        else:
            full[i, a_col] = 1.0
            basis[i] = a_col
            art_cols.append(a_col)
            a_col += 1

    tab = _Tableau(full, b, basis)
    allowed = np.ones(width, dtype=bool)
    if art_cols:
        c_phase1 = np.zeros(width)
        c_phase1[art_cols] = -1.0
        tab.set_objective(c_phase1)
        status = tab.run(allowed, tol, max_pivots)
        if status == Status.LIMIT:
            return SolveReport(Status.LIMIT, iterations=tab.pivots)
        if -tab.T[m, width] < -max(tol, 1e-9) * max(1.0, np.abs(b).max(initial=0.0)):
            return SolveReport(Status.INFEASIBLE, iterations=tab.pivots)
        is_art = np.zeros(width, dtype=bool)
        is_art[art_cols] = True
        for r in range(m):
            if is_art[tab.basis[r]]:
                row = np.where(is_art, 0.0, np.abs(tab.T[r, :width]))
                j = int(np.argmax(row))
                if row[j] > PIVOT_TOL:
                    tab.pivot(r, j)
        allowed = ~is_art

    c_full = np.zeros(width)
    c_full[:k] = c
    tab.set_objective(c_full)
    status = tab.run(allowed, tol, max_pivots)
    if status != Status.OPTIMAL:
        return SolveReport(status, iterations=tab.pivots)

    y = np.zeros(width)
    y[tab.basis] = tab.T[:m, width]
    x = offset + R @ y[:k]
    B = full[:, tab.basis]
    try:
        duals_std = np.linalg.solve(B.T, c_full[tab.basis])
    except np.linalg.LinAlgError:
        duals_std = np.linalg.lstsq(B.T, c_full[tab.basis], rcond=None)[0]
    duals = (duals_std * flip)[:n_orig_rows]
    return SolveReport(Status.OPTIMAL, x=x, objective=float(lp.c @ x),
                       iterations=tab.pivots, duals=duals)
