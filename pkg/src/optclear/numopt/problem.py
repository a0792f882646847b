from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

LE, GE, EQ = "<=", ">=", "=="
DEFAULT_TOL = 1e-7


class Status(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    LIMIT = "limit_reached"


@dataclass
class LinearProgram:
    """``max c.x`` subject to ``A x (senses) rhs`` and ``lower <= x <= upper``.

    Bounds may be infinite. Rows are dense; the matching problems are small.
    """

    c: np.ndarray
    A: np.ndarray
    senses: np.ndarray
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        n = self.c.shape[0]
        if n == 0:
            raise ValueError("a linear program needs at least one variable")
        self.A = np.asarray(self.A, dtype=float).reshape(-1, n)
        m = self.A.shape[0]
        self.senses = np.asarray(self.senses, dtype=object).reshape(-1)
        self.rhs = np.asarray(self.rhs, dtype=float).reshape(-1)
        self.lower = np.broadcast_to(np.asarray(self.lower, dtype=float), (n,)).copy()
        self.upper = np.broadcast_to(np.asarray(self.upper, dtype=float), (n,)).copy()
        if self.senses.shape[0] != m or self.rhs.shape[0] != m:
            raise ValueError("senses/rhs length must equal the number of rows")
        if not set(self.senses) <= {LE, GE, EQ}:
            raise ValueError(f"unknown constraint sense in {set(self.senses)}")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def n_vars(self) -> int:
        return self.c.shape[0]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def with_bounds(self, lower=None, upper=None) -> "LinearProgram":
        return LinearProgram(self.c, self.A, self.senses, self.rhs,
                             self.lower if lower is None else lower,
                             self.upper if upper is None else upper)

    def row_activity(self, x) -> np.ndarray:
        return self.A @ np.asarray(x, dtype=float)

    def max_violation(self, x) -> float:
        """Largest primal infeasibility of ``x`` (rows and bounds)."""
        x = np.asarray(x, dtype=float)
        act = self.row_activity(x) - self.rhs
        v = [0.0]
        if act.size:
            v.append(np.max(np.where(self.senses == LE, act, 0.0)))
            v.append(np.max(np.where(self.senses == GE, -act, 0.0)))
            v.append(np.max(np.where(self.senses == EQ, np.abs(act), 0.0)))
        v.append(np.max(self.lower - x))
        v.append(np.max(x - self.upper))
        return float(max(v))


@dataclass
class MixedIntegerProgram:
    """A linear program with a subset of variables restricted to {0, 1}."""

    lp: LinearProgram
    binaries: np.ndarray

    def __post_init__(self):
        self.binaries = np.asarray(self.binaries, dtype=int).reshape(-1)
        if self.binaries.size and (self.binaries.min() < 0
                                   or self.binaries.max() >= self.lp.n_vars):
            raise ValueError("binary index out of range")
        lo, hi = self.lp.lower.copy(), self.lp.upper.copy()
        lo[self.binaries] = np.maximum(lo[self.binaries], 0.0)
        hi[self.binaries] = np.minimum(hi[self.binaries], 1.0)
        self.lp = self.lp.with_bounds(lo, hi)


@dataclass
class SolveReport:
    status: Status
    x: np.ndarray | None = None
    objective: float | None = None
    iterations: int = 0
    nodes: int = 0
    duals: np.ndarray | None = None

    def __post_init__(self):
        if (self.status == Status.OPTIMAL) != (self.x is not None):
            raise ValueError("a solution is present iff status is optimal")

    @property
    def optimal(self) -> bool:
        return self.status == Status.OPTIMAL


def dual_bound(lp: LinearProgram, y, zero_tol: float = 1e-9) -> float:
    """Lagrangian upper bound on ``lp``'s optimum from row multipliers ``y``.

    Sign conventions (maximization): ``y >= 0`` on ``<=`` rows, ``y <= 0``
    on ``>=`` rows, free on equalities. Wrong-signed multipliers are clipped,
    so the result is always a valid bound. Returns ``inf`` when a reduced
    cost larger than ``zero_tol`` points into an infinite bound.
    """
    y = np.asarray(y, dtype=float).copy()
    y[lp.senses == LE] = np.maximum(y[lp.senses == LE], 0.0)
    y[lp.senses == GE] = np.minimum(y[lp.senses == GE], 0.0)
    d = lp.c - lp.A.T @ y
    d[np.abs(d) <= zero_tol] = 0.0
    total = float(lp.rhs @ y)
    for dj, lo, hi in zip(d, lp.lower, lp.upper):
        if dj > 0:
            if not np.isfinite(hi):
                return np.inf
            total += dj * hi
        elif dj < 0:
            if not np.isfinite(lo):
                return np.inf
            total += dj * lo
    return total


def duality_gap(lp: LinearProgram, report: SolveReport) -> float:
    if not report.optimal or report.duals is None:
        raise ValueError("duality gap needs an optimal report with duals")
    return dual_bound(lp, report.duals) - report.objective
